"""Reusable lemma-verification suites.

Each suite returns a JSON-able report dict with a boolean "passed"; the CLI
and the acceptance tests drive the same functions with different trial
budgets. Hard structural bounds (status deltas, squared differences) demand
zero violations; statistical checks carry 3-sigma slack.
"""

from __future__ import annotations

import math
from itertools import permutations

import numpy as np

from .generators import (complete_graph, cycle_graph, erdos_renyi, path_graph,
                         random_regular, star_forest, star_graph)
from .graph import Graph, Matching, Priorities, edge_sample, residual_degrees
from .greedy import greedy_mm, match_status_delta, sample_and_greedy
from .harness import (ZEvaluator, efron_stein_check, efron_stein_exact,
                      lipschitz_z_check, survivor_census)
from .mpc import assign_partitions
from .oracles import degree_oracle, edge_oracle, partitioned_edge_oracle
from .pipeline import PhaseConfig
from .rng import rng_from, subseed


# ---------------------------------------------------------------------------
# corpora

def atlas_graphs(max_m: int | None = None, min_m: int = 1) -> list[Graph]:
    """All non-isomorphic graphs on up to 7 vertices (optionally filtered by
    edge count), from the graph atlas shipped with networkx."""
    from networkx.generators.atlas import graph_atlas_g

    out = []
    for H in graph_atlas_g():
        m = H.number_of_edges()
        if m < min_m or (max_m is not None and m > max_m):
            continue
        n = H.number_of_nodes()
        edges = np.array(sorted(tuple(sorted(e)) for e in H.edges()),
                         dtype=np.int64).reshape(-1, 2)
        out.append(Graph(n, edges, validate=False))
    return out


def structured_small_graphs(max_m: int = 9) -> list[Graph]:
    """Paths, cycles, stars and small complete(-bipartite) graphs with at
    most max_m edges."""
    from .generators import complete_bipartite_graph

    out = [path_graph(k + 1) for k in range(1, max_m + 1)]
    out += [cycle_graph(k) for k in range(3, max_m + 1)]
    out += [star_graph(k) for k in range(1, max_m + 1)]
    out += [complete_graph(4)]
    if max_m >= 9:
        out.append(complete_bipartite_graph(3, 3))
    return [g for g in out if g.m <= max_m]


def random_corpus(count: int, seed, n_range=(8, 60), avg_deg_range=(2.0, 8.0)
                  ) -> list[Graph]:
    rng = rng_from(seed, 0xC0)
    out = []
    while len(out) < count:
        n = int(rng.integers(n_range[0], n_range[1], endpoint=True))
        avg = float(rng.uniform(*avg_deg_range))
        G = erdos_renyi(n, min(avg, n - 1), int(rng.integers(0, 2 ** 31)))
        if G.m:
            out.append(G)
    return out


# ---------------------------------------------------------------------------
# greedy scans specialized for perturbation sweeps (pure python, tiny graphs)

def _order_of(rho_list, m):
    return sorted(range(m), key=lambda e: rho_list[e])


def _scan_status(edges, order, n, skip_vertex=None, skip_edge=None):
    matched = [False] * n
    for e in order:
        if e == skip_edge:
            continue
        u, v = edges[e]
        if u == skip_vertex or v == skip_vertex:
            continue
        if not matched[u] and not matched[v]:
            matched[u] = True
            matched[v] = True
    return matched


def _delta_count(a, b) -> int:
    return sum(1 for x, y in zip(a, b) if x != y)


def lipschitz_exhaustive(graphs: list[Graph], rho_draws: int, seed
                         ) -> dict:
    """Every single-vertex removal, single-edge removal, and single-priority
    resample across the corpus; the status delta must never exceed 2."""
    rng = rng_from(seed, 0x11F)
    checks = 0
    worst = 0
    violations = []
    for gi, G in enumerate(graphs):
        edges = [tuple(e) for e in G.edges.tolist()]
        n, m = G.n, G.m
        for draw in range(rho_draws):
            rho = rng.random(m).tolist()
            order = _order_of(rho, m)
            base = _scan_status(edges, order, n)
            for v in range(n):
                d = _delta_count(base, _scan_status(edges, order, n,
                                                    skip_vertex=v))
                checks += 1
                worst = max(worst, d)
                if d > 2:
                    violations.append(("vertex", gi, draw, v))
            for e in range(m):
                d = _delta_count(base, _scan_status(edges, order, n,
                                                    skip_edge=e))
                checks += 1
                worst = max(worst, d)
                if d > 2:
                    violations.append(("edge", gi, draw, e))
            for e in range(m):
                new_rho = rho.copy()
                new_rho[e] = float(rng.random())
                d = _delta_count(base, _scan_status(edges, _order_of(new_rho, m), n))
                checks += 1
                worst = max(worst, d)
                if d > 2:
                    violations.append(("priority", gi, draw, e))
    return {"graphs": len(graphs), "rho_draws": rho_draws, "checks": checks,
            "max_delta": worst, "violations": len(violations),
            "passed": not violations}


def lipschitz_random(trials: int, seed, n_range=(10, 60)) -> dict:
    """Random instances, one random perturbation per trial; bound 2."""
    rng = rng_from(seed, 0x11A)
    worst = 0
    violations = 0
    for t in range(trials):
        n = int(rng.integers(*n_range, endpoint=True))
        G = erdos_renyi(n, float(rng.uniform(2, 6)), int(rng.integers(2 ** 31)))
        if G.m == 0:
            continue
        edges = [tuple(e) for e in G.edges.tolist()]
        rho = rng.random(G.m).tolist()
        order = _order_of(rho, G.m)
        base = _scan_status(edges, order, G.n)
        kind = ("vertex", "edge", "priority")[int(rng.integers(3))]
        if kind == "vertex":
            other = _scan_status(edges, order, G.n,
                                 skip_vertex=int(rng.integers(G.n)))
        elif kind == "edge":
            other = _scan_status(edges, order, G.n,
                                 skip_edge=int(rng.integers(G.m)))
        else:
            e = int(rng.integers(G.m))
            new_rho = rho.copy()
            new_rho[e] = float(rng.random())
            other = _scan_status(edges, _order_of(new_rho, G.m), G.n)
        d = _delta_count(base, other)
        worst = max(worst, d)
        if d > 2:
            violations += 1
    return {"trials": trials, "max_delta": worst, "violations": violations,
            "passed": violations == 0}


def lipschitz_suite(trials: int = 1000, seed: int = 0,
                    exhaustive: bool = False, rho_draws: int = 20) -> dict:
    graphs = atlas_graphs(max_m=21) if exhaustive else \
        atlas_graphs(max_m=6)[:120]
    rep_ex = lipschitz_exhaustive(graphs, rho_draws, seed)
    rep_rand = lipschitz_random(trials, subseed(seed, 1))
    return {"suite": "lipschitz", "exhaustive": rep_ex, "random": rep_rand,
            "passed": rep_ex["passed"] and rep_rand["passed"]}


# ---------------------------------------------------------------------------
# residual-degree tails on edge-sampled greedy

def tail_check(G: Graph, p: float, beta: float, trials: int, seed) -> dict:
    """Observed frequency of residual degree above ln(1/beta)/p after greedy
    on a p-sample, pooled over vertices; must stay within beta + 3 sigma."""
    rho = Priorities.draw(G.m, subseed(seed, 1))
    threshold = math.log(1.0 / beta) / p
    fractions = np.empty(trials)
    for t in range(trials):
        sg = sample_and_greedy(G, p, rho, subseed(seed, 2, t))
        res = residual_degrees(G, sg.matching)
        fractions[t] = float((res > threshold).mean())
    mean = float(fractions.mean())
    sigma = float(fractions.std(ddof=1)) / math.sqrt(trials)
    slack = 3.0 * max(sigma, math.sqrt(beta * (1 - beta) / (trials * G.n)))
    return {"n": G.n, "p": p, "beta": beta, "threshold": threshold,
            "trials": trials, "observed": mean, "slack": slack,
            "passed": mean <= beta + slack}


def tails_suite(trials: int = 2000, seed: int = 0,
                p_values=(0.5, 0.2), betas=(0.1, 0.05)) -> dict:
    instances = [("complete-20", complete_graph(20)),
                 ("random-regular-200-20", random_regular(200, 20, seed=7))]
    checks = []
    for gi, (name, G) in enumerate(instances):
        for p in p_values:
            for beta in betas:
                rep = tail_check(G, p, beta, trials, subseed(seed, gi))
                rep["instance"] = name
                checks.append(rep)
    return {"suite": "tails", "checks": checks,
            "passed": all(c["passed"] for c in checks)}


# ---------------------------------------------------------------------------
# oracle equivalence

def _rho_from_order(order, m) -> Priorities:
    rho = np.empty(m, dtype=np.uint64)
    for rank, e in enumerate(order):
        rho[e] = rank
    return Priorities(rho)


def oracle_vs_greedy_exhaustive(graphs: list[Graph]) -> dict:
    """Edge-oracle answers against direct greedy membership under every
    priority order of every corpus graph."""
    instances = 0
    queries = 0
    disagreements = 0
    for G in graphs:
        m = G.m
        for order in permutations(range(m)):
            rho = _rho_from_order(order, m)
            member = np.zeros(m, dtype=bool)
            member[greedy_mm(G, rho).edge_ids] = True
            for e in range(m):
                ans, _ = edge_oracle(G, rho, e)
                queries += 1
                if ans != member[e]:
                    disagreements += 1
            instances += 1
    return {"graphs": len(graphs), "orders": instances, "queries": queries,
            "disagreements": disagreements, "passed": disagreements == 0}


def partitioned_oracle_check(G: Graph, rho: Priorities, x: np.ndarray) -> int:
    """Disagreements between the partitioned oracle and greedy membership on
    the partition-1 induced subgraph."""
    keep = x.astype(bool)
    se = G.edges
    in_l1 = keep[se[:, 0]] & keep[se[:, 1]] if G.m else np.zeros(0, bool)
    order = np.argsort(rho.rho, kind="stable").tolist()
    matched = bytearray(G.n)
    member = set()
    eu = se[:, 0].tolist() if G.m else []
    ev = se[:, 1].tolist() if G.m else []
    for j in order:
        if not in_l1[j]:
            continue
        u, v = eu[j], ev[j]
        if not matched[u] and not matched[v]:
            matched[u] = 1
            matched[v] = 1
            member.add(j)
    bad = 0
    for e in range(G.m):
        ans, _ = partitioned_edge_oracle(G, rho, x, e)
        if ans != (e in member):
            bad += 1
    return bad


def degree_oracle_check(G: Graph, gl: Graph, rho_s: Priorities,
                        x: np.ndarray) -> int:
    """Disagreements between the degree oracle and direct recomputation."""
    keep = x.astype(bool)
    se = gl.edges
    in_l1 = keep[se[:, 0]] & keep[se[:, 1]] if gl.m else np.zeros(0, bool)
    order = np.argsort(rho_s.rho, kind="stable").tolist()
    matched = bytearray(G.n)
    eu = se[:, 0].tolist() if gl.m else []
    ev = se[:, 1].tolist() if gl.m else []
    for j in order:
        if not in_l1[j]:
            continue
        u, v = eu[j], ev[j]
        if not matched[u] and not matched[v]:
            matched[u] = 1
            matched[v] = 1
    bad = 0
    for v in range(G.n):
        want = sum(1 for u in G.neighbors(v).tolist()
                   if keep[u] and not matched[u])
        got, _ = degree_oracle(G, gl, rho_s, x, v)
        if got != want:
            bad += 1
    return bad


def oracle_equivalence_suite(seed: int = 0, exhaustive_max_m: int = 5,
                             random_instances: int = 50,
                             structured_max_m: int = 7,
                             random_x_per_order: int = 0) -> dict:
    corpus = atlas_graphs(max_m=exhaustive_max_m) + \
        structured_small_graphs(max_m=structured_max_m)
    rep_plain = oracle_vs_greedy_exhaustive(corpus)

    rng = rng_from(seed, 0x0E)
    part_bad = 0
    deg_bad = 0
    count = 0
    for G in random_corpus(random_instances, subseed(seed, 3)):
        rho = Priorities.draw(G.m, int(rng.integers(2 ** 31)))
        x = (rng.random(G.n) < 0.5).astype(np.uint8)
        part_bad += partitioned_oracle_check(G, rho, x)
        part_bad += partitioned_oracle_check(G, rho,
                                             np.ones(G.n, dtype=np.uint8))
        sub = edge_sample(G, 0.5, int(rng.integers(2 ** 31)))
        deg_bad += degree_oracle_check(G, sub.graph,
                                       rho.restrict(sub.edge_ids), x)
        count += 1
    return {"suite": "oracle-equivalence", "exhaustive": rep_plain,
            "random_instances": count,
            "partitioned_disagreements": part_bad,
            "degree_disagreements": deg_bad,
            "passed": rep_plain["passed"] and part_bad == 0 and deg_bad == 0}


# ---------------------------------------------------------------------------
# Efron-Stein mechanism

def efron_stein_suite(pairs: int = 30, trials: int = 150, seed: int = 0,
                      lipschitz_trials: int = 2000) -> dict:
    rng = rng_from(seed, 0xE5E)
    holds = 0
    max_sq = 0
    for j in range(pairs):
        G = erdos_renyi(30, 4.0, int(rng.integers(2 ** 31)))
        rho = Priorities.draw(G.m, int(rng.integers(2 ** 31)))
        v = int(rng.integers(G.n))
        chk = efron_stein_check(G, rho, int(rng.integers(2 ** 31)), v, trials,
                                p=0.5, k=2, seed=int(rng.integers(2 ** 31)))
        holds += chk.holds
        max_sq = max(max_sq, chk.max_square_diff)

    G1 = path_graph(2)
    rho1 = Priorities.draw(1, 5)
    var_exact, es_exact = efron_stein_exact(G1, rho1, l_seed=3, p=1.0, k=2)
    single_edge_ok = (abs(var_exact - 3.0 / 16.0) < 1e-12 and
                      abs(es_exact - 1.0 / 4.0) < 1e-12 and
                      var_exact <= es_exact)

    Gl = erdos_renyi(50, 4.0, seed=11)
    rhol = Priorities.draw(Gl.m, 12)
    worst = max(lipschitz_z_check(Gl, rhol, 13, v, lipschitz_trials // 5,
                                  p=0.5, k=2, seed=14 + v)
                for v in range(5))
    max_sq = max(max_sq, worst)

    frac = holds / pairs
    return {"suite": "efron-stein", "pairs": pairs, "holds_fraction": frac,
            "max_square_diff": int(max_sq),
            "single_edge_exact": {"variance": var_exact, "bound": es_exact,
                                  "ok": single_edge_ok},
            "passed": frac >= 0.95 and max_sq <= 4 and single_edge_ok}


# ---------------------------------------------------------------------------
# query complexity

def _reference_total_calls(G: Graph, rho: Priorities) -> int:
    """Plain recursive edge-oracle call totals (independent reference)."""
    rank = rho.ranks().tolist()
    indptr, _, nbr_eid = G.adjacency()
    lower = []
    for e in range(G.m):
        u, v = G.edges[e]
        ids = set(nbr_eid[indptr[u]:indptr[u + 1]].tolist())
        ids.update(nbr_eid[indptr[v]:indptr[v + 1]].tolist())
        ids.discard(e)
        lower.append(sorted((f for f in ids if rank[f] < rank[e]),
                            key=rank.__getitem__))

    import sys
    sys.setrecursionlimit(10000 + 10 * G.m)

    def go(f):
        calls = 1
        for g in lower[f]:
            ans, c = go(g)
            calls += c
            if ans:
                return False, calls
        return True, calls

    return sum(go(e)[1] for e in range(G.m))


def exact_star_query_mean(d: int) -> float:
    """E over all priority orders of the total raw call count on K_{1,d}."""
    total = 0
    count = 0
    G = star_graph(d)
    for order in permutations(range(d)):
        rho = _rho_from_order(order, d)
        total += _reference_total_calls(G, rho)
        count += 1
    return total / count


def query_complexity_suite(draws: int = 100, seed: int = 0,
                           instances=None) -> dict:
    from .graph import intersecting_pair_count
    from .oracles import query_complexity_stats

    if instances is None:
        instances = [("star-5", star_graph(5)),
                     ("path-30", path_graph(30)),
                     ("erdos-renyi-60-6", erdos_renyi(60, 6.0, seed=21))]
    checks = []
    for gi, (name, G) in enumerate(instances):
        stats = query_complexity_stats(G, draws, subseed(seed, gi))
        checks.append({
            "instance": name, "m": G.m,
            "intersecting_pairs": stats.intersecting_pairs,
            "mean_total_calls": stats.mean_total_calls,
            "bound": stats.reference_bound,
            "passed": stats.mean_total_calls <= stats.reference_bound,
        })

    d = 5
    exact = exact_star_query_mean(d)
    stats = query_complexity_stats(star_graph(d), max(200, draws), subseed(seed, 77))
    sigma = stats.std_total_calls / math.sqrt(stats.trials)
    star_ok = abs(stats.mean_total_calls - exact) <= 3 * max(sigma, 1e-9)
    return {"suite": "query-complexity", "checks": checks,
            "star_exact": {"d": d, "exact_mean": exact,
                           "empirical_mean": stats.mean_total_calls,
                           "ok": star_ok},
            "passed": all(c["passed"] for c in checks) and star_ok}


# ---------------------------------------------------------------------------
# survivor trend

def survivors_suite(n: int = 20000, deltas=(16, 64, 256), seeds: int = 10,
                    seed: int = 0, k_exponent: float = 0.3) -> dict:
    cfg = PhaseConfig(k_exponent=k_exponent)
    medians = []
    for d in deltas:
        G = star_forest(n, d)
        census = survivor_census(G, cfg, seeds, seed=subseed(seed, d))
        medians.append(census.median_fraction)
    decreasing = all(b <= a for a, b in zip(medians, medians[1:]))
    fitted_c = max(f * (d ** 0.03) for f, d in zip(medians, deltas))
    return {"suite": "survivors", "n": n, "deltas": list(deltas),
            "median_fractions": medians, "fitted_constant": fitted_c,
            "k_exponent": k_exponent, "passed": decreasing}
