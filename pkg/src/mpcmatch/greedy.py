"""Sequential random-greedy maximal matching and its perturbation helpers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import EDGE_DTYPE, Graph, Matching, Priorities, Subgraph, edge_sample
from .rng import subseed


@dataclass(frozen=True)
class GreedyTrace:
    """Processing order and the per-edge added/blocked decision."""

    processed_order: np.ndarray  # edge ids, ascending priority
    decisions: np.ndarray        # bool, aligned with processed_order


def _scan(edges: np.ndarray, order, n: int):
    """Core greedy scan: add an edge iff both endpoints are still free."""
    eu = edges[:, 0].tolist()
    ev = edges[:, 1].tolist()
    matched = bytearray(n)
    added = []
    for e in order:
        u = eu[e]
        v = ev[e]
        if not matched[u] and not matched[v]:
            matched[u] = 1
            matched[v] = 1
            added.append(e)
    return added, matched


def greedy_mm(G: Graph, rho: Priorities, *, trace: bool = False):
    """GreedyMM(G, pi): process edges by ascending priority, add an edge iff
    no incident edge was added before it.

    Deterministic in (G, rho); the result is maximal in G. With trace=True
    returns (Matching, GreedyTrace).
    """
    if rho.m != G.m:
        raise ValueError(f"priorities cover {rho.m} edges, graph has {G.m}")
    order = rho.order().tolist()
    added, matched = _scan(G.edges, order, G.n)
    ids = np.array(sorted(added), dtype=EDGE_DTYPE)
    M = Matching(ids, np.frombuffer(bytes(matched), dtype=np.uint8).astype(bool))
    if not trace:
        return M
    added_set = set(added)
    decisions = np.fromiter((e in added_set for e in order), dtype=bool,
                            count=len(order))
    return M, GreedyTrace(np.array(order, dtype=EDGE_DTYPE), decisions)


def match_status_delta(M1: Matching, M2: Matching) -> np.ndarray:
    """Vertices whose match-status differs between two matchings."""
    if M1.matched.size != M2.matched.size:
        raise ValueError("matchings over different vertex universes")
    return np.nonzero(M1.matched != M2.matched)[0]


@dataclass(frozen=True)
class SampledGreedy:
    """Greedy matching of an edge-sampled subgraph, mapped back to the host
    graph's edge ids."""

    matching: Matching   # over V(G), edge ids in G
    sampled: Subgraph


def sample_and_greedy(G: Graph, p: float, rho: Priorities, seed) -> SampledGreedy:
    """GreedyMM on the p-edge-sampled subgraph, under G's priorities."""
    sub = edge_sample(G, p, subseed(seed, 0x5A))
    M_sub = greedy_mm(sub.graph, rho.restrict(sub.edge_ids))
    ids = sub.edge_ids[M_sub.edge_ids]
    return SampledGreedy(Matching(ids, M_sub.matched), sub)
