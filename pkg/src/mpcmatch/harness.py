"""Statistical verification machinery: partition-degree statistics,
variance bounds by coordinate resampling, probe-count censuses, and the
exact small-instance oracles that gate every Monte-Carlo estimator.

Conditioning convention: priorities and the edge sample stay fixed (given
by their seeds) while the vertex partition is redrawn, so every variance
here is a conditional variance given (priorities, sample).
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .graph import Graph, Matching, Priorities, edge_sample, residual_degrees
from .mpc import assign_partitions
from .oracles import degree_oracle
from .pipeline import PhaseConfig, partition_mm
from .rng import rng_from, subseed


class ZEvaluator:
    """Direct recomputation of Z_{v,1}(x): greedy-match the sampled graph
    restricted to partition 1 and count v's unmatched partition-1 neighbors.

    Priorities and the edge sample are fixed at construction; `value` is a
    pure function of the indicator vector.
    """

    def __init__(self, G: Graph, rho: Priorities, l_seed, p: float, v: int):
        sub = edge_sample(G, p, l_seed)
        self.gl = sub.graph
        rho_s = rho.restrict(sub.edge_ids)
        self.order = np.argsort(rho_s.rho, kind="stable").tolist()
        self.eu = self.gl.edges[:, 0].tolist() if self.gl.m else []
        self.ev = self.gl.edges[:, 1].tolist() if self.gl.m else []
        self.nbrs = G.neighbors(v).tolist()
        self.n = G.n
        self.v = v

    def value(self, x) -> int:
        matched = bytearray(self.n)
        eu, ev = self.eu, self.ev
        for j in self.order:
            u = eu[j]
            w = ev[j]
            if x[u] and x[w] and not matched[u] and not matched[w]:
                matched[u] = 1
                matched[w] = 1
        return sum(1 for u in self.nbrs if x[u] and not matched[u])


@dataclass(frozen=True)
class ZStats:
    """Samples of the partition-degree variable for one (vertex, partition)."""

    vertex: int
    partition_index: int
    samples: np.ndarray
    mean: float
    variance: float


def z_statistics(G: Graph, rho: Priorities, l_seed, v: int, i: int,
                 trials: int, *, p: float, k: int, chi_seed=0) -> ZStats:
    """Monte-Carlo draws of Z_{v,i} over the vertex partition, with the
    priorities and edge sample held fixed."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if not 1 <= i <= k:
        raise ValueError(f"partition index {i} outside 1..{k}")
    sub = edge_sample(G, p, l_seed)
    gl = sub.graph
    rho_s = rho.restrict(sub.edge_ids)
    order = np.argsort(rho_s.rho, kind="stable").tolist()
    eu = gl.edges[:, 0].tolist() if gl.m else []
    ev = gl.edges[:, 1].tolist() if gl.m else []
    nbrs = G.neighbors(v).tolist()
    out = np.empty(trials, dtype=np.int64)
    for t in range(trials):
        chi = assign_partitions(G.n, k, subseed(chi_seed, 0x7A, t)).chi.tolist()
        matched = bytearray(G.n)
        for j in order:
            u = eu[j]
            w = ev[j]
            if chi[u] == i and chi[w] == i and not matched[u] and not matched[w]:
                matched[u] = 1
                matched[w] = 1
        out[t] = sum(1 for u in nbrs if chi[u] == i and not matched[u])
    mean = float(out.mean())
    var = float(out.var(ddof=1)) if trials > 1 else 0.0
    return ZStats(v, i, out, mean, var)


@dataclass(frozen=True)
class EfronSteinCheck:
    """Empirical conditional variance against the resampling upper bound."""

    vertex: int
    variance: float
    es_bound: float
    se_variance: float
    se_bound: float
    trials: int
    max_square_diff: int
    holds: bool


def efron_stein_check(G: Graph, rho: Priorities, l_seed, v: int, trials: int,
                      *, p: float, k: int, seed=0) -> EfronSteinCheck:
    """Estimate Var(Z_{v,1}) and the resampling bound
    (1/2) E[sum_w (Z(x) - Z(x^(w)))^2], redrawing one coordinate at a time
    from its own distribution; `holds` allows 3 sigma of combined error."""
    if trials < 2:
        raise ValueError("need at least 2 trials for a variance")
    ev = ZEvaluator(G, rho, l_seed, p, v)
    rng = rng_from(seed, 0xE5)
    q = 1.0 / k
    zs = np.empty(trials, dtype=np.float64)
    sums = np.empty(trials, dtype=np.float64)
    max_sq = 0
    n = G.n
    for t in range(trials):
        x = bytearray((rng.random(n) < q).astype(np.uint8).tobytes())
        z = ev.value(x)
        zs[t] = z
        redraw = (rng.random(n) < q).astype(np.uint8)
        total = 0
        for w in range(n):
            if redraw[w] == x[w]:
                continue
            old = x[w]
            x[w] = redraw[w]
            dz = z - ev.value(x)
            x[w] = old
            sq = dz * dz
            total += sq
            if sq > max_sq:
                max_sq = sq
        sums[t] = total
    var_hat = float(zs.var(ddof=1))
    es_hat = 0.5 * float(sums.mean())
    se_var = var_hat * math.sqrt(2.0 / (trials - 1))
    se_es = 0.5 * float(sums.std(ddof=1)) / math.sqrt(trials)
    holds = var_hat <= es_hat + 3.0 * (se_var + se_es)
    return EfronSteinCheck(v, var_hat, es_hat, se_var, se_es, trials,
                           int(max_sq), holds)


def efron_stein_exact(G: Graph, rho: Priorities, l_seed, v: int, *,
                      p: float, k: int) -> tuple[float, float]:
    """Exact Var(Z_{v,1}) and resampling bound by enumerating all 2^n
    indicator vectors (n <= 20)."""
    n = G.n
    if n > 20:
        raise ValueError("exact enumeration limited to n <= 20")
    ev = ZEvaluator(G, rho, l_seed, p, v)
    q = 1.0 / k
    probs = np.empty(2 ** n)
    zvals = np.empty(2 ** n)
    xs = []
    for code in range(2 ** n):
        x = [(code >> b) & 1 for b in range(n)]
        ones = sum(x)
        probs[code] = q ** ones * (1 - q) ** (n - ones)
        zvals[code] = ev.value(x)
        xs.append(x)
    mean = float((probs * zvals).sum())
    var = float((probs * (zvals - mean) ** 2).sum())
    rhs = 0.0
    for code in range(2 ** n):
        x = xs[code]
        z = zvals[code]
        for w in range(n):
            flipped = code ^ (1 << w)
            p_new_differs = q if x[w] == 0 else (1 - q)
            dz = z - zvals[flipped]
            rhs += probs[code] * p_new_differs * dz * dz
    return var, 0.5 * rhs


def lipschitz_z_check(G: Graph, rho: Priorities, l_seed, v: int, trials: int,
                      *, p: float, k: int, seed=0) -> int:
    """Max observed (Z(x) - Z(x^(w)))^2 over random indicators and flipped
    single coordinates; the structural hard bound is 4."""
    ev = ZEvaluator(G, rho, l_seed, p, v)
    rng = rng_from(seed, 0x11)
    q = 1.0 / k
    n = G.n
    worst = 0
    for _ in range(trials):
        x = bytearray((rng.random(n) < q).astype(np.uint8).tobytes())
        z = ev.value(x)
        w = int(rng.integers(0, n))
        x[w] ^= 1
        dz = z - ev.value(x)
        if dz * dz > worst:
            worst = dz * dz
    return int(worst)


@dataclass(frozen=True)
class BadVertexCensus:
    """Per-vertex probe-budget estimates E[B(v) | priorities, sample]."""

    mean_probe_budget: np.ndarray   # per vertex
    bad_threshold: float            # Delta ** 1.4
    bad_fraction: float
    total_probe_budget: float       # sum_v mean B(v)
    reference: float                # n * Delta ** 1.15
    trials: int


def bad_vertex_census(G: Graph, trials: int, *, p: float, k: int,
                      rho_seed=1, l_seed=2, seed=0,
                      vertices=None) -> BadVertexCensus:
    """Estimate probe budgets by running the degree oracle under fresh
    partitions; vertices defaults to all of V."""
    rho = Priorities.draw(G.m, rho_seed)
    sub = edge_sample(G, p, l_seed)
    gl = sub.graph
    rho_s = rho.restrict(sub.edge_ids)
    verts = list(range(G.n)) if vertices is None else list(vertices)
    rng = rng_from(seed, 0xBC)
    q = 1.0 / k
    means = np.zeros(len(verts))
    for t in range(trials):
        x = (rng.random(G.n) < q).astype(np.uint8)
        for j, v in enumerate(verts):
            _, ledger = degree_oracle(G, gl, rho_s, x, v)
            means[j] += ledger.vertex_probes
    means /= trials
    delta = max(1, G.max_degree())
    bad_threshold = delta ** 1.4
    bad_fraction = float((means > bad_threshold).mean()) if len(verts) else 0.0
    total = float(means.sum()) * (G.n / max(1, len(verts)))
    return BadVertexCensus(means, bad_threshold, bad_fraction, total,
                           G.n * delta ** 1.15, trials)


@dataclass(frozen=True)
class SurvivorCensus:
    """High-residual-degree survivor fractions over repeated runs."""

    fractions: np.ndarray
    mean_fraction: float
    median_fraction: float
    threshold: float


def survivor_census(G: Graph, cfg: PhaseConfig, trials: int,
                    seed=0) -> SurvivorCensus:
    """Fraction of vertices left with residual degree above
    Delta ** high_degree_exponent after single partitioned-matching runs."""
    fr = np.empty(trials)
    for t in range(trials):
        rep = partition_mm(G, cfg, subseed(seed, 0x5C, t))
        fr[t] = rep.high_degree_survivors / max(1, G.n)
    delta = max(1, G.max_degree())
    return SurvivorCensus(fr, float(fr.mean()), float(np.median(fr)),
                          delta ** cfg.high_degree_exponent)


def survivors_given_inputs(G: Graph, rho: Priorities, keep: np.ndarray,
                           chi: np.ndarray, threshold: float) -> int:
    """Survivor count of one partitioned run with every random input pinned
    (used to measure single-coordinate sensitivity of the run)."""
    edge_ids = np.nonzero(keep)[0]
    rows = G.edges[edge_ids]
    order = np.argsort(rho.rho[edge_ids], kind="stable").tolist()
    eu = rows[:, 0].tolist()
    ev = rows[:, 1].tolist()
    chi_l = chi.tolist()
    matched = bytearray(G.n)
    for j in order:
        u = eu[j]
        w = ev[j]
        if chi_l[u] == chi_l[w] and not matched[u] and not matched[w]:
            matched[u] = 1
            matched[w] = 1
    M = Matching(edge_ids[:0], np.frombuffer(bytes(matched),
                                             dtype=np.uint8).astype(bool))
    res = residual_degrees(G, M)
    return int((res > threshold).sum())


def brute_force_max_matching(G: Graph) -> Matching:
    """Exact maximum matching: exhaustive search for m <= 30, otherwise a
    blossom-based exact algorithm for n <= 200."""
    if G.m <= 30:
        best_ids = _max_matching_exhaustive(G)
        return Matching.from_edge_ids(G, best_ids)
    if G.n <= 200:
        import networkx as nx

        H = nx.Graph()
        H.add_nodes_from(range(G.n))
        H.add_edges_from(map(tuple, G.edges.tolist()))
        pairs = nx.max_weight_matching(H, maxcardinality=True)
        lookup = {(int(u), int(v)): e for e, (u, v) in enumerate(G.edges)}
        ids = [lookup[(min(u, v), max(u, v))] for u, v in pairs]
        return Matching.from_edge_ids(G, ids)
    raise ValueError("instance too large for the exact matching oracle")


def _max_matching_exhaustive(G: Graph) -> list[int]:
    indptr, nbr, eid = G.adjacency()
    n = G.n
    alive = bytearray(1 for _ in range(n))

    def rec(start: int) -> list[int]:
        u = start
        while u < n and not (alive[u] and indptr[u] != indptr[u + 1] and any(
                alive[w] for w in nbr[indptr[u]:indptr[u + 1]].tolist())):
            u += 1
        if u == n:
            return []
        alive[u] = 0
        best = rec(u + 1)  # u stays unmatched
        for pos in range(indptr[u], indptr[u + 1]):
            w = int(nbr[pos])
            if not alive[w]:
                continue
            alive[w] = 0
            cand = [int(eid[pos])] + rec(u + 1)
            if len(cand) > len(best):
                best = cand
            alive[w] = 1
        alive[u] = 1
        return best

    return rec(0)


def brute_force_min_vertex_cover(G: Graph) -> np.ndarray:
    """Exact minimum vertex cover by branching on an uncovered edge."""
    edges = [tuple(e) for e in G.edges.tolist()]

    def rec(idx: int, cover: set, best_size: int) -> set | None:
        if len(cover) >= best_size:
            return None
        while idx < len(edges) and (edges[idx][0] in cover or
                                    edges[idx][1] in cover):
            idx += 1
        if idx == len(edges):
            return set(cover)
        u, v = edges[idx]
        best = None
        for pick in (u, v):
            cover.add(pick)
            got = rec(idx + 1, cover,
                      best_size if best is None else len(best))
            cover.remove(pick)
            if got is not None and (best is None or len(got) < len(best)):
                best = got
        return best

    best = rec(0, set(), G.n + 1)
    return np.array(sorted(best if best is not None else []), dtype=np.int64)


def loglog_slope(xs, ys) -> float:
    """Least-squares slope of log(y) against log(x); requires positives."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if (xs <= 0).any() or (ys <= 0).any():
        raise ValueError("log-log fit needs positive values")
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])


def linear_slope(xs, ys) -> float:
    return float(np.polyfit(np.asarray(xs, float), np.asarray(ys, float), 1)[0])


def is_non_increasing(values, tolerance: float = 0.0) -> bool:
    v = np.asarray(values, dtype=float)
    return bool((v[1:] <= v[:-1] + tolerance).all())


def write_csv(path, rows: list[dict], columns: list[str]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns)
        writer.writeheader()
        for row in rows:
            writer.writerow({c: row.get(c, "") for c in columns})


def write_json(path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")
