"""Query processes for greedy-matching membership and residual partition
degree, with exact accounting of oracle calls and probed partition entries.

The edge oracle answers "is edge e in the greedy matching?" by recursing on
lower-priority incident edges; the call count of the memo-free recursion is
the quantity A(e). The partitioned variant first probes the partition
indicator of the endpoints and only recurses inside partition 1; the degree
oracle counts a vertex's unmatched partition-1 neighbors, probing entries of
the indicator vector as it goes (B(v) = distinct vertices probed).

Recursion is simulated with an explicit stack, so deep priority chains are
safe. Memoization (per top-level invocation) changes neither answers nor the
set of distinct probed vertices, only the call counts; run memo-free when
the raw recursion size is the point.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graph import Graph, Priorities
from .rng import subseed


@dataclass
class QueryLedger:
    """Accounting for one top-level oracle invocation."""

    edge_oracle_calls: int = 0
    probed_vertices: set = field(default_factory=set)
    l1_edges_queried: set = field(default_factory=set)
    memo: dict | None = None

    @property
    def vertex_probes(self) -> int:
        """Number of distinct indicator entries probed."""
        return len(self.probed_vertices)


class _Incidence:
    """Per-edge lists of lower-priority incident edges, built lazily.

    Incident edges are ordered by ascending (priority, edge id), matching
    the greedy processing order.
    """

    def __init__(self, G: Graph, rho: Priorities):
        if rho.m != G.m:
            raise ValueError(f"priorities cover {rho.m} edges, graph has {G.m}")
        indptr, _, nbr_eid = G.adjacency()
        self._indptr = indptr
        self._nbr_eid = nbr_eid
        self.rank = rho.ranks().tolist()
        self.eu = G.edges[:, 0].tolist() if G.m else []
        self.ev = G.edges[:, 1].tolist() if G.m else []
        self._cache: dict[int, list[int]] = {}

    def lower_incident(self, e: int) -> list[int]:
        lst = self._cache.get(e)
        if lst is None:
            indptr = self._indptr
            u, v = self.eu[e], self.ev[e]
            ids = set(self._nbr_eid[indptr[u]:indptr[u + 1]].tolist())
            ids.update(self._nbr_eid[indptr[v]:indptr[v + 1]].tolist())
            ids.discard(e)
            rank = self.rank
            re = rank[e]
            lst = sorted((f for f in ids if rank[f] < re), key=rank.__getitem__)
            self._cache[e] = lst
        return lst


def _run_plain(inc: _Incidence, e0: int, ledger: QueryLedger,
               memo: dict | None) -> bool:
    """Edge oracle on the whole graph; returns membership of e0."""
    ledger.edge_oracle_calls += 1
    if memo is not None and e0 in memo:
        return memo[e0]
    stack = [[e0, inc.lower_incident(e0), 0]]
    ret: bool | None = None
    while stack:
        frame = stack[-1]
        e, lst, i = frame
        if ret is True:
            # the child at lst[i] joined the matching, so e is blocked
            stack.pop()
            if memo is not None:
                memo[e] = False
            ret = False
            continue
        if ret is False:
            i += 1
            frame[2] = i
        ret = None
        pushed = False
        while i < len(lst):
            child = lst[i]
            ledger.edge_oracle_calls += 1
            cached = memo.get(child) if memo is not None else None
            if cached is None:
                stack.append([child, inc.lower_incident(child), 0])
                pushed = True
                break
            if cached:
                stack.pop()
                if memo is not None:
                    memo[e] = False
                ret = False
                break
            i += 1
            frame[2] = i
        if pushed or ret is not None:
            continue
        # no lower-priority incident edge joined: e joins the matching
        stack.pop()
        if memo is not None:
            memo[e] = True
        ret = True
    return bool(ret)


def edge_oracle(G: Graph, rho: Priorities, e: int, *,
                memoize: bool = True) -> tuple[bool, QueryLedger]:
    """Decide whether edge e belongs to GreedyMM(G, rho) by querying.

    The ledger's edge_oracle_calls counts every oracle invocation including
    the top-level one; memo-free this equals the raw recursion size A(e).
    """
    if not 0 <= e < G.m:
        raise ValueError(f"edge {e} outside graph")
    inc = _Incidence(G, rho)
    ledger = QueryLedger(memo={} if memoize else None)
    ans = _run_plain(inc, e, ledger, ledger.memo)
    return ans, ledger


def _run_partitioned(inc: _Incidence, x, e0: int, ledger: QueryLedger,
                     memo: dict | None) -> bool:
    """Edge oracle for membership in the partition-1 greedy matching.

    x is the 0/1 indicator of partition 1. Every invocation probes the
    endpoints of its edge; edges with an endpoint outside partition 1 answer
    no without recursing.
    """

    def invoke(e: int):
        """Returns the answer if immediate, else None (must recurse)."""
        ledger.edge_oracle_calls += 1
        if memo is not None and e in memo:
            return memo[e]
        u, v = inc.eu[e], inc.ev[e]
        ledger.probed_vertices.add(u)
        ledger.probed_vertices.add(v)
        if not (x[u] and x[v]):
            if memo is not None:
                memo[e] = False
            return False
        ledger.l1_edges_queried.add(e)
        return None

    first = invoke(e0)
    if first is not None:
        return first
    stack = [[e0, inc.lower_incident(e0), 0]]
    ret: bool | None = None
    while stack:
        frame = stack[-1]
        e, lst, i = frame
        if ret is True:
            stack.pop()
            if memo is not None:
                memo[e] = False
            ret = False
            continue
        if ret is False:
            i += 1
            frame[2] = i
        ret = None
        pushed = False
        while i < len(lst):
            child = lst[i]
            ans = invoke(child)
            if ans is None:
                stack.append([child, inc.lower_incident(child), 0])
                pushed = True
                break
            if ans:
                stack.pop()
                if memo is not None:
                    memo[e] = False
                ret = False
                break
            i += 1
            frame[2] = i
        if pushed or ret is not None:
            continue
        stack.pop()
        if memo is not None:
            memo[e] = True
        ret = True
    return bool(ret)


def partitioned_edge_oracle(GL: Graph, rho: Priorities, x, e: int, *,
                            memoize: bool = True) -> tuple[bool, QueryLedger]:
    """Decide whether e is in the greedy matching of GL restricted to
    partition 1, probing indicator entries at most once per invocation."""
    if not 0 <= e < GL.m:
        raise ValueError(f"edge {e} outside graph")
    x = np.asarray(x)
    inc = _Incidence(GL, rho)
    ledger = QueryLedger(memo={} if memoize else None)
    ans = _run_partitioned(inc, x, e, ledger, ledger.memo)
    return ans, ledger


def degree_oracle(G: Graph, GL: Graph, rho: Priorities, x, v: int, *,
                  memoize: bool = True) -> tuple[int, QueryLedger]:
    """Count v's neighbors (in G) that lie in partition 1 and stay unmatched
    by the partition-1 greedy matching of GL.

    All incident edges of each candidate neighbor are oracled (no short
    circuit), mirroring the raw query process, so probe counts are faithful.
    """
    if not 0 <= v < G.n:
        raise ValueError(f"vertex {v} outside graph")
    if GL.n != G.n:
        raise ValueError("sampled graph must share the vertex set")
    x = np.asarray(x)
    inc = _Incidence(GL, rho)
    ledger = QueryLedger(memo={} if memoize else None)
    memo = ledger.memo
    count = 0
    gl_indptr, gl_nbr, gl_eid = GL.adjacency()
    for u in G.neighbors(v).tolist():
        ledger.probed_vertices.add(u)
        if not x[u]:
            continue
        matched = False
        for eid in gl_eid[gl_indptr[u]:gl_indptr[u + 1]].tolist():
            ans = _run_partitioned(inc, x, eid, ledger, memo)
            if ans:
                matched = True
        if not matched:
            count += 1
    return count, ledger


@dataclass(frozen=True)
class QueryStats:
    """Mean memo-free query totals against the m + 2r reference bound."""

    trials: int
    mean_total_calls: float
    std_total_calls: float
    m: int
    intersecting_pairs: int

    @property
    def reference_bound(self) -> float:
        return float(self.m + 2 * self.intersecting_pairs)


def query_complexity_stats(G: Graph, trials: int, seed) -> QueryStats:
    """Draw fresh priorities per trial and total the raw recursion sizes
    A(e) over all edges (memoization off)."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    from .graph import intersecting_pair_count

    totals = np.empty(trials, dtype=np.float64)
    for t in range(trials):
        rho = Priorities.draw(G.m, subseed(seed, 0xAE, t))
        inc = _Incidence(G, rho)
        total = 0
        for e in range(G.m):
            ledger = QueryLedger()
            _run_plain(inc, e, ledger, None)
            total += ledger.edge_oracle_calls
        totals[t] = total
    return QueryStats(
        trials=trials,
        mean_total_calls=float(totals.mean()),
        std_total_calls=float(totals.std(ddof=1)) if trials > 1 else 0.0,
        m=G.m,
        intersecting_pairs=intersecting_pair_count(G),
    )
