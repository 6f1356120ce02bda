"""Immutable graph container, subgraph construction, and matching primitives.

Vertices are dense ints 0..n-1, edge ids dense ints 0..m-1. Adjacency is
built lazily in CSR form so that edge-array-only pipelines never pay for it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

VERTEX_DTYPE = np.int32
EDGE_DTYPE = np.int64

PRIORITY_MAX = np.iinfo(np.uint64).max


class ParseError(ValueError):
    """Malformed edge-list input; carries the 1-based line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class Graph:
    """Simple undirected graph with stable, dense vertex and edge ids.

    Invariants: no self-loops, no parallel edges; `edges[j] = (u, v)` with
    u < v; adjacency lists are sorted by neighbor id and mirror the edge set
    symmetrically.
    """

    __slots__ = ("n", "m", "edges", "vertex_labels", "_indptr", "_nbr",
                 "_nbr_eid", "_degrees")

    def __init__(self, n: int, edges: np.ndarray, *, vertex_labels=None,
                 validate: bool = True):
        edges = np.asarray(edges, dtype=VERTEX_DTYPE).reshape(-1, 2)
        if validate and edges.size:
            if edges.min() < 0 or edges.max() >= n:
                raise ValueError("edge endpoint outside 0..n-1")
            if (edges[:, 0] == edges[:, 1]).any():
                raise ValueError("self-loop in edge list")
            lo = np.minimum(edges[:, 0], edges[:, 1])
            hi = np.maximum(edges[:, 0], edges[:, 1])
            edges = np.column_stack([lo, hi])
            key = lo.astype(np.int64) * n + hi
            if np.unique(key).size != key.size:
                raise ValueError("parallel edge in edge list")
        elif edges.size:
            lo = np.minimum(edges[:, 0], edges[:, 1])
            hi = np.maximum(edges[:, 0], edges[:, 1])
            edges = np.column_stack([lo, hi])
        self.n = int(n)
        self.m = int(edges.shape[0])
        self.edges = edges
        self.edges.setflags(write=False)
        self.vertex_labels = vertex_labels
        self._indptr = None
        self._nbr = None
        self._nbr_eid = None
        self._degrees = None

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.m})"

    def degrees(self) -> np.ndarray:
        if self._degrees is None:
            self._degrees = np.bincount(self.edges.ravel(), minlength=self.n)
            self._degrees.setflags(write=False)
        return self._degrees

    def max_degree(self) -> int:
        d = self.degrees()
        return int(d.max()) if self.n else 0

    def _ensure_adjacency(self):
        if self._indptr is not None:
            return
        src = np.concatenate([self.edges[:, 0], self.edges[:, 1]])
        dst = np.concatenate([self.edges[:, 1], self.edges[:, 0]])
        eid = np.concatenate([np.arange(self.m, dtype=EDGE_DTYPE)] * 2) \
            if self.m else np.empty(0, dtype=EDGE_DTYPE)
        order = np.lexsort((dst, src))
        self._nbr = dst[order]
        self._nbr_eid = eid[order] if self.m else eid
        counts = np.bincount(src, minlength=self.n)
        self._indptr = np.concatenate([[0], np.cumsum(counts)]).astype(EDGE_DTYPE)

    def neighbors(self, v: int) -> np.ndarray:
        """Sorted neighbor ids of v."""
        self._ensure_adjacency()
        return self._nbr[self._indptr[v]:self._indptr[v + 1]]

    def incident_edges(self, v: int) -> np.ndarray:
        """Edge ids incident to v, ordered by neighbor id."""
        self._ensure_adjacency()
        return self._nbr_eid[self._indptr[v]:self._indptr[v + 1]]

    def adjacency(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """CSR triple (indptr, neighbor, edge-id)."""
        self._ensure_adjacency()
        return self._indptr, self._nbr, self._nbr_eid

    def has_edge(self, u: int, v: int) -> bool:
        nbrs = self.neighbors(u)
        return bool(np.searchsorted(nbrs, v) < len(nbrs) and
                    nbrs[np.searchsorted(nbrs, v)] == v)


@dataclass(frozen=True)
class Subgraph:
    """A derived graph plus the id maps back to its parent."""

    graph: Graph
    vertex_ids: np.ndarray  # new vertex id -> parent vertex id
    edge_ids: np.ndarray    # new edge id -> parent edge id


@dataclass(frozen=True)
class Matching:
    """A set of vertex-disjoint edges with the per-vertex match flags."""

    edge_ids: np.ndarray   # sorted edge ids, dtype int64
    matched: np.ndarray    # bool, one per vertex

    @classmethod
    def empty(cls, n: int) -> "Matching":
        return cls(np.empty(0, dtype=EDGE_DTYPE), np.zeros(n, dtype=bool))

    @classmethod
    def from_edge_ids(cls, G: Graph, edge_ids) -> "Matching":
        ids = np.unique(np.asarray(edge_ids, dtype=EDGE_DTYPE))
        if ids.size and (ids[0] < 0 or ids[-1] >= G.m):
            raise ValueError("edge id outside graph")
        ends = G.edges[ids]
        matched = np.zeros(G.n, dtype=bool)
        if ids.size:
            flat = ends.ravel()
            if np.unique(flat).size != flat.size:
                raise ValueError("edges share an endpoint")
            matched[flat] = True
        return cls(ids, matched)

    @property
    def size(self) -> int:
        return int(self.edge_ids.size)

    def union(self, other: "Matching", G: Graph) -> "Matching":
        """Union of two vertex-disjoint matchings over the same graph."""
        if self.matched.size != other.matched.size:
            raise ValueError("matchings over different vertex universes")
        if (self.matched & other.matched).any():
            raise ValueError("matchings are not vertex-disjoint")
        ids = np.union1d(self.edge_ids, other.edge_ids)
        return Matching(ids, self.matched | other.matched)


@dataclass(frozen=True)
class Priorities:
    """Per-edge priorities: 64-bit uniforms, ties broken by edge id.

    The processing order is ascending (rho, edge-id); `as_float` views the
    values as reals in [0, 1).
    """

    rho: np.ndarray  # uint64

    @classmethod
    def draw(cls, m: int, seed) -> "Priorities":
        rng = np.random.default_rng(seed)
        rho = rng.integers(0, PRIORITY_MAX, size=m, dtype=np.uint64,
                           endpoint=True)
        return cls(rho)

    @property
    def m(self) -> int:
        return int(self.rho.size)

    def order(self) -> np.ndarray:
        """Edge ids sorted by ascending priority (stable in edge id)."""
        return np.argsort(self.rho, kind="stable")

    def ranks(self) -> np.ndarray:
        """rank[e] = position of edge e in the processing order."""
        order = self.order()
        ranks = np.empty_like(order)
        ranks[order] = np.arange(order.size)
        return ranks

    def restrict(self, edge_ids: np.ndarray) -> "Priorities":
        """Priorities of a subgraph whose edge ids map back via edge_ids."""
        return Priorities(self.rho[np.asarray(edge_ids, dtype=EDGE_DTYPE)])

    def resample(self, e: int, seed) -> "Priorities":
        """Redraw the single 64-bit value of edge e."""
        rng = np.random.default_rng(seed)
        rho = self.rho.copy()
        rho[e] = rng.integers(0, PRIORITY_MAX, dtype=np.uint64, endpoint=True)
        return Priorities(rho)

    def as_float(self) -> np.ndarray:
        return self.rho.astype(np.float64) / float(2 ** 64)


@dataclass(frozen=True)
class PartitionAssignment:
    """Vertex coloring chi: V -> {1..k} with the partition-1 indicator."""

    chi: np.ndarray  # int32 values in 1..k
    k: int

    def members(self, i: int) -> np.ndarray:
        return np.nonzero(self.chi == i)[0]

    def indicator(self, i: int = 1) -> np.ndarray:
        """x[v] = 1 iff chi(v) = i, as a uint8 vector."""
        return (self.chi == i).astype(np.uint8)


@dataclass
class EdgeListReport:
    """What the loader skipped or collapsed."""

    self_loops: list = field(default_factory=list)  # (line_no, u, v)
    duplicates: int = 0


def parse_edge_list(text: str) -> tuple[Graph, EdgeListReport]:
    """Parse whitespace-separated "u v" lines; '#' starts a comment.

    Self-loops are rejected per edge and reported; duplicate edges collapse.
    Vertex ids are compacted to 0..n-1 with the original labels retained.
    """
    report = EdgeListReport()
    us, vs = [], []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ParseError(line_no, f"expected 'u v', got {raw!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError(line_no, f"non-integer endpoint in {raw!r}") from None
        if u == v:
            report.self_loops.append((line_no, u, v))
            continue
        us.append(u)
        vs.append(v)
    if not us:
        return Graph(0, np.empty((0, 2), dtype=VERTEX_DTYPE)), report
    raw_edges = np.array([us, vs], dtype=np.int64).T
    labels, compact = np.unique(raw_edges, return_inverse=True)
    compact = compact.reshape(-1, 2).astype(VERTEX_DTYPE)
    n = labels.size
    lo = np.minimum(compact[:, 0], compact[:, 1])
    hi = np.maximum(compact[:, 0], compact[:, 1])
    key = lo.astype(np.int64) * n + hi
    uniq, first = np.unique(key, return_index=True)
    report.duplicates = int(key.size - uniq.size)
    first.sort()
    edges = np.column_stack([lo[first], hi[first]])
    return Graph(n, edges, vertex_labels=labels, validate=False), report


def load_graph(source) -> Graph:
    """Load a graph from edge-list text or a file path."""
    if hasattr(source, "read"):
        text = source.read()
    else:
        text = str(source)
        if "\n" not in text and not text.strip().split(" ")[0].lstrip("-").isdigit():
            with open(text) as fh:
                text = fh.read()
    graph, _ = parse_edge_list(text)
    return graph


def load_graph_file(path) -> tuple[Graph, EdgeListReport]:
    with open(path) as fh:
        return parse_edge_list(fh.read())


def save_edge_list(G: Graph, path) -> None:
    with open(path, "w") as fh:
        fh.write(f"# n={G.n} m={G.m}\n")
        for u, v in G.edges:
            fh.write(f"{u} {v}\n")


def induced_subgraph(G: Graph, S) -> Subgraph:
    """G[S]: the subgraph induced by vertex set S, with id maps to G.

    S may be an array of vertex ids or a boolean mask over V(G).
    """
    S = np.asarray(S)
    if S.dtype == bool:
        if S.size != G.n:
            raise ValueError("mask length differs from vertex count")
        mask = S
        vertex_ids = np.nonzero(mask)[0].astype(VERTEX_DTYPE)
    else:
        vertex_ids = np.unique(S.astype(np.int64))
        if vertex_ids.size and (vertex_ids[0] < 0 or vertex_ids[-1] >= G.n):
            raise ValueError("vertex outside graph")
        vertex_ids = vertex_ids.astype(VERTEX_DTYPE)
        mask = np.zeros(G.n, dtype=bool)
        mask[vertex_ids] = True
    new_id = np.full(G.n, -1, dtype=VERTEX_DTYPE)
    new_id[vertex_ids] = np.arange(vertex_ids.size, dtype=VERTEX_DTYPE)
    keep = mask[G.edges[:, 0]] & mask[G.edges[:, 1]] if G.m else \
        np.empty(0, dtype=bool)
    edge_ids = np.nonzero(keep)[0].astype(EDGE_DTYPE)
    edges = new_id[G.edges[edge_ids]]
    sub = Graph(vertex_ids.size, edges, validate=False)
    return Subgraph(sub, vertex_ids, edge_ids)


def edge_sample(G: Graph, p: float, seed) -> Subgraph:
    """Keep each edge independently with probability p; vertices unchanged.

    Deterministic for a fixed seed. Edge ids are re-compacted; the map back
    to G is in `edge_ids`.
    """
    if not 0.0 < p <= 1.0:
        raise ValueError(f"sampling probability must be in (0, 1], got {p}")
    rng = np.random.default_rng(seed)
    keep = rng.random(G.m) < p
    edge_ids = np.nonzero(keep)[0].astype(EDGE_DTYPE)
    sub = Graph(G.n, G.edges[edge_ids], validate=False)
    return Subgraph(sub, np.arange(G.n, dtype=VERTEX_DTYPE), edge_ids)


def residual_degrees(G: Graph, M: Matching) -> np.ndarray:
    """Residual degree of every vertex: 0 if matched, else the number of
    unmatched neighbors."""
    if M.matched.size != G.n:
        raise ValueError("matching over a different vertex universe")
    if G.m == 0:
        return np.zeros(G.n, dtype=np.int64)
    un = ~M.matched
    active = un[G.edges[:, 0]] & un[G.edges[:, 1]]
    return np.bincount(G.edges[active].ravel(), minlength=G.n)


def residual_degree(G: Graph, M: Matching, v: int) -> int:
    if not 0 <= v < G.n:
        raise ValueError(f"vertex {v} outside graph")
    if M.matched[v]:
        return 0
    nbrs = G.neighbors(v)
    return int((~M.matched[nbrs]).sum())


@dataclass(frozen=True)
class MatchingCheck:
    valid: bool
    maximal: bool
    violation: tuple | None = None  # (kind, detail)


def verify_matching(G: Graph, M: Matching) -> MatchingCheck:
    """Check vertex-disjointness/consistency and maximality.

    When a flag is false, `violation` names one offending edge or vertex.
    """
    ids = M.edge_ids
    if ids.size and (ids.min() < 0 or ids.max() >= G.m):
        return MatchingCheck(False, False, ("edge-outside-graph", int(ids.max())))
    if np.unique(ids).size != ids.size:
        return MatchingCheck(False, False, ("duplicate-edge", None))
    ends = G.edges[ids].ravel() if ids.size else np.empty(0, dtype=VERTEX_DTYPE)
    if np.unique(ends).size != ends.size:
        counts = np.bincount(ends)
        v = int(np.argmax(counts))
        return MatchingCheck(False, False, ("shared-endpoint", v))
    expect = np.zeros(G.n, dtype=bool)
    expect[ends] = True
    if M.matched.size != G.n or not np.array_equal(expect, M.matched):
        return MatchingCheck(False, False, ("match-flags-inconsistent", None))
    if G.m:
        un = ~M.matched
        addable = un[G.edges[:, 0]] & un[G.edges[:, 1]]
        if addable.any():
            e = int(np.argmax(addable))
            return MatchingCheck(True, False, ("addable-edge", e))
    return MatchingCheck(True, True, None)


def intersecting_pair_count(G: Graph) -> int:
    """Number of unordered edge pairs sharing an endpoint: sum_v C(deg v, 2)."""
    d = G.degrees().astype(np.int64)
    return int((d * (d - 1) // 2).sum())


def matching_to_json_dict(G: Graph, M: Matching) -> dict:
    """Edge-id-list export of a matching (the wire format for results)."""
    return {
        "schema": "mpcmatch.matching/1",
        "n": G.n,
        "m": G.m,
        "size": M.size,
        "edge_ids": [int(e) for e in M.edge_ids],
        "edges": [[int(u), int(v)] for u, v in G.edges[M.edge_ids]],
    }
