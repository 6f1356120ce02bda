"""The matching pipeline: partitioned greedy rounds, amplification, leftover
cleanup, the degree-reduction phase, and the iterate-then-finish driver.

Machine layout per phase: repetition j of the partitioned step occupies
machines j*k .. j*k + k - 1 for its two rounds (route, result); the cleanup
and gather steps and the driver's final finish each use machine 0. Every
round is charged against the phase budget c_s * n / Delta^s (s = 0.05 by
default); the final finish is charged against the linear-space budget
n * (1 + terminal degree).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .graph import (EDGE_DTYPE, Graph, Matching, Priorities, edge_sample,
                    induced_subgraph, residual_degrees, verify_matching)
from .mpc import RoundLog, assign_partitions, space_words
from .rng import subseed

_EXPONENT_FIELDS = ("p_exponent", "k_exponent", "high_degree_exponent",
                    "cleanup_threshold_exponent", "cleanup_sample_exponent",
                    "survivor_cap_exponent", "space_budget_exponent")


@dataclass(frozen=True)
class PhaseConfig:
    """Tunable exponents and constants of the degree-reduction phase.

    Defaults follow the published parameterization; the space and terminal
    constants are desk-scale calibrations and are documented in the README.
    """

    p_exponent: float = 0.85
    k_exponent: float = 0.1
    high_degree_exponent: float = 0.99
    cleanup_threshold_exponent: float = 0.999
    cleanup_sample_exponent: float = 0.99
    survivor_cap_exponent: float = 0.02
    space_budget_exponent: float = 0.05
    repetitions: int = 8
    terminal_degree_constant: int = 32
    space_constant: float = 8.0
    max_retries: int = 3

    def __post_init__(self):
        for name in _EXPONENT_FIELDS:
            value = getattr(self, name)
            if not 0.0 < value < 1.0:
                raise ValueError(f"{name} must lie in (0, 1), got {value}")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if self.terminal_degree_constant < 1:
            raise ValueError("terminal degree constant must be >= 1")
        if self.space_constant <= 0:
            raise ValueError("space constant must be positive")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")

    def sample_p(self, delta: int) -> float:
        return min(1.0, max(1, delta) ** -self.p_exponent)

    def partition_count(self, delta: int) -> int:
        return max(1, int(max(1, delta) ** self.k_exponent))

    def high_degree_threshold(self, delta: int) -> float:
        return max(1, delta) ** self.high_degree_exponent

    def cleanup_threshold(self, delta: int) -> float:
        return max(1, delta) ** self.cleanup_threshold_exponent

    def cleanup_q(self, delta: int) -> float:
        return min(1.0, max(1, delta) ** -self.cleanup_sample_exponent)

    def alg1_budget(self, n: int, delta: int) -> int:
        return max(1, math.ceil(
            self.space_constant * n / max(1, delta) ** self.space_budget_exponent))

    def survivor_cap(self, n: int, delta: int) -> float:
        return n / max(1, delta) ** self.survivor_cap_exponent

    def with_overrides(self, **kw) -> "PhaseConfig":
        return replace(self, **kw)


@dataclass
class PhaseReport:
    """Outcome of one phase (or one partitioned-matching step)."""

    matching: Matching
    delta: int
    residual_max_degree: int
    high_degree_survivors: int
    round_cost: int
    space_clean: bool
    alg1_survivors: int | None = None
    skipped: bool = False
    success: bool = True


def _greedy_on_edge_rows(G: Graph, edge_ids: np.ndarray, order,
                         restrict_same_partition=None) -> list[int]:
    """Greedy scan over a subset of G's edges in the given order.

    edge_ids indexes G.edges; order indexes edge_ids. The optional partition
    filter keeps only rows whose endpoints share a partition, which runs all
    per-partition greedy matchings in one interleaved pass (they cannot
    interact, because partitions are vertex-disjoint).
    """
    rows = G.edges[edge_ids]
    eu = rows[:, 0].tolist()
    ev = rows[:, 1].tolist()
    same = restrict_same_partition.tolist() if restrict_same_partition is not None else None
    matched = bytearray(G.n)
    added = []
    for j in order:
        if same is not None and not same[j]:
            continue
        u = eu[j]
        v = ev[j]
        if not matched[u] and not matched[v]:
            matched[u] = 1
            matched[v] = 1
            added.append(j)
    return added


def _alg1_once(G: Graph, cfg: PhaseConfig, seed, machine_base: int,
               route_rec, result_rec) -> tuple[Matching, int, int]:
    """One run of the partitioned matching step, charging into the given
    round records. Returns (matching, survivor count, residual max degree)."""
    delta = max(1, G.max_degree())
    p = cfg.sample_p(delta)
    k = cfg.partition_count(delta)

    rho = Priorities.draw(G.m, subseed(seed, 1))
    sub = edge_sample(G, p, subseed(seed, 2))
    rho_s = rho.restrict(sub.edge_ids)
    del rho
    part = assign_partitions(G.n, k, subseed(seed, 3))
    chi = part.chi

    se = sub.graph.edges
    if se.size:
        pu = chi[se[:, 0]]
        same = pu == chi[se[:, 1]]
    else:
        pu = np.empty(0, dtype=np.int32)
        same = np.empty(0, dtype=bool)

    order = np.argsort(rho_s.rho, kind="stable").tolist()
    added_local = _greedy_on_edge_rows(sub.graph, np.arange(sub.graph.m),
                                       order, restrict_same_partition=same)
    M = Matching.from_edge_ids(G, sub.edge_ids[added_local])

    v_counts = np.bincount(chi, minlength=k + 1)[1:]
    l_counts = np.bincount(pu[same], minlength=k + 1)[1:] if se.size \
        else np.zeros(k, dtype=np.int64)
    for i in range(k):
        route_rec and _charge(route_rec, machine_base + i,
                              space_words(v_counts[i], l_counts[i]))
    if M.size:
        m_counts = np.bincount(chi[G.edges[M.edge_ids][:, 0]],
                               minlength=k + 1)[1:]
    else:
        m_counts = np.zeros(k, dtype=np.int64)
    for i in range(k):
        result_rec and _charge(result_rec, machine_base + i, 2 * int(m_counts[i]))

    res = residual_degrees(G, M)
    survivors = int((res > cfg.high_degree_threshold(delta)).sum())
    res_max = int(res.max()) if res.size else 0
    return M, survivors, res_max


def _charge(rec, machine: int, words: int):
    words = int(words)
    before = rec.words_used.get(machine, 0)
    after = before + words
    rec.words_used[machine] = after
    rec.message_words[machine] = rec.message_words.get(machine, 0) + words
    if after > rec.budget and before <= rec.budget:
        rec.violations.append({"kind": "machine", "machine": machine,
                               "words": after, "budget": rec.budget})


def partition_mm(G: Graph, cfg: PhaseConfig, seed, *,
                 log: RoundLog | None = None,
                 machine_base: int = 0) -> PhaseReport:
    """One partitioned greedy matching step: a shared priority draw, one
    edge-sample, a uniform vertex partition, and the union of per-partition
    greedy matchings. Two rounds: route subgraphs, report matchings."""
    log = log if log is not None else RoundLog()
    delta = G.max_degree()
    budget = cfg.alg1_budget(G.n, delta)
    route = log.begin_round("alg1-route", budget, delta)
    result = log.begin_round("alg1-result", budget, delta)
    M, survivors, res_max = _alg1_once(G, cfg, seed, machine_base, route, result)
    clean = not (route.violations or result.violations)
    return PhaseReport(matching=M, delta=delta, residual_max_degree=res_max,
                       high_degree_survivors=survivors, round_cost=2,
                       space_clean=clean, alg1_survivors=survivors)


def amplified_partition_mm(G: Graph, cfg: PhaseConfig, seed, *,
                           log: RoundLog | None = None) -> PhaseReport:
    """Run `repetitions` independent partitioned steps in parallel machine
    groups and keep the one with the fewest high-residual-degree vertices."""
    log = log if log is not None else RoundLog()
    delta = G.max_degree()
    if delta <= cfg.terminal_degree_constant:
        return PhaseReport(matching=Matching.empty(G.n), delta=delta,
                           residual_max_degree=delta, high_degree_survivors=0,
                           round_cost=0, space_clean=True, skipped=True)
    budget = cfg.alg1_budget(G.n, delta)
    route = log.begin_round("alg1-route", budget, delta)
    result = log.begin_round("alg1-result", budget, delta)
    k = cfg.partition_count(delta)
    best = None
    for j in range(cfg.repetitions):
        rep_seed = seed if j == 0 else subseed(seed, 10, j)
        M, survivors, res_max = _alg1_once(G, cfg, rep_seed, j * k, route, result)
        if best is None or survivors < best[1]:
            best = (M, survivors, res_max)
    M, survivors, res_max = best
    clean = not (route.violations or result.violations)
    return PhaseReport(matching=M, delta=delta, residual_max_degree=res_max,
                       high_degree_survivors=survivors, round_cost=2,
                       space_clean=clean, alg1_survivors=survivors)


def leftover_cleanup(G: Graph, M: Matching, cfg: PhaseConfig, seed, *,
                     log: RoundLog | None = None,
                     delta: int | None = None) -> Matching:
    """Sample the residual edges around still-high-degree vertices and match
    them greedily on one machine (edge-id processing order)."""
    log = log if log is not None else RoundLog()
    delta = G.max_degree() if delta is None else delta
    tau = cfg.cleanup_threshold(delta)
    q = cfg.cleanup_q(delta)
    res = residual_degrees(G, M)
    hot = res > tau
    budget = cfg.alg1_budget(G.n, delta)
    rec = log.begin_round("cleanup", budget, delta)
    if not hot.any() or G.m == 0:
        _charge(rec, 0, 0)
        return Matching.empty(G.n)
    un = ~M.matched
    e = G.edges
    cand = un[e[:, 0]] & un[e[:, 1]] & (hot[e[:, 0]] | hot[e[:, 1]])
    cand_ids = np.nonzero(cand)[0].astype(EDGE_DTYPE)
    rng = np.random.default_rng(subseed(seed, 4))
    kept = cand_ids[rng.random(cand_ids.size) < q]
    added = _greedy_on_edge_rows(G, kept, range(kept.size))
    Mp = Matching.from_edge_ids(G, kept[added])
    touched = np.unique(e[kept].ravel()).size if kept.size else 0
    _charge(rec, 0, space_words(touched, kept.size))
    return Mp


def degree_reduction_phase(G: Graph, cfg: PhaseConfig, seed, *,
                           log: RoundLog | None = None) -> PhaseReport:
    """One full phase: amplified partitioned matching, leftover cleanup,
    then gather every remaining high-degree vertex with its residual edges
    onto one machine and extend the matching there.

    Postcondition (checked): the residual max degree drops strictly below
    delta ** cleanup_threshold_exponent. A failure is reported, not raised.
    """
    log = log if log is not None else RoundLog()
    delta = G.max_degree()
    if delta <= cfg.terminal_degree_constant:
        raise ValueError("max degree at or below the terminal constant; "
                         "finish on one machine instead")
    first = len(log.rounds)
    amp = amplified_partition_mm(G, cfg, seed, log=log)
    Mp = leftover_cleanup(G, amp.matching, cfg, subseed(seed, 5), log=log,
                          delta=delta)
    M2 = amp.matching.union(Mp, G)

    tau = cfg.cleanup_threshold(delta)
    res2 = residual_degrees(G, M2)
    hot = res2 >= tau
    rec = log.begin_round("gather", cfg.alg1_budget(G.n, delta), delta)
    if hot.any():
        un = ~M2.matched
        e = G.edges
        cand = un[e[:, 0]] & un[e[:, 1]] & (hot[e[:, 0]] | hot[e[:, 1]])
        gather_ids = np.nonzero(cand)[0].astype(EDGE_DTYPE)
        added = _greedy_on_edge_rows(G, gather_ids, range(gather_ids.size))
        Mpp = Matching.from_edge_ids(G, gather_ids[added])
        touched = np.unique(e[gather_ids].ravel()).size if gather_ids.size else 0
        _charge(rec, 0, space_words(touched, gather_ids.size))
        M3 = M2.union(Mpp, G)
    else:
        _charge(rec, 0, 0)
        M3 = M2

    res3 = residual_degrees(G, M3)
    res_max = int(res3.max()) if res3.size else 0
    survivors = int((res3 > cfg.high_degree_threshold(delta)).sum())
    clean = not any(r.violations for r in log.rounds[first:])
    return PhaseReport(matching=M3, delta=delta, residual_max_degree=res_max,
                       high_degree_survivors=survivors,
                       round_cost=amp.round_cost + 2, space_clean=clean,
                       alg1_survivors=amp.alg1_survivors,
                       success=res_max < tau)


@dataclass
class DriverResult:
    """Final matching plus the per-phase and space/round accounting."""

    matching: Matching
    valid: bool
    maximal: bool
    phases: list = field(default_factory=list)
    rounds: int = 0
    space_clean: bool = True
    round_log: RoundLog | None = None
    mode: str = "loglog"
    seed: int = 0
    failed: bool = False
    failure: str | None = None

    def summary_dict(self) -> dict:
        return {
            "schema": "mpcmatch.driver-summary/1",
            "mode": self.mode,
            "seed": self.seed,
            "matching_size": self.matching.size,
            "valid": self.valid,
            "maximal": self.maximal,
            "phase_count": len(self.phases),
            "phases": self.phases,
            "rounds": self.rounds,
            "space_clean": self.space_clean,
            "failed": self.failed,
            "failure": self.failure,
        }


_PHASE_CAP = 64


def maximal_matching_driver(G: Graph, cfg: PhaseConfig | None = None, *,
                            mode: str = "loglog", delta: float | None = None,
                            seed: int = 0) -> DriverResult:
    """Iterate degree-reduction phases until the residual degree target is
    met, then finish the whole residual graph on one machine.

    mode "loglog" targets the terminal degree constant; mode
    "constant-delta" targets n**delta for the given delta in (0, 1).
    """
    cfg = cfg or PhaseConfig()
    if mode == "loglog":
        target = cfg.terminal_degree_constant
    elif mode == "constant-delta":
        if delta is None or not 0.0 < delta < 1.0:
            raise ValueError("constant-delta mode needs delta in (0, 1)")
        target = max(cfg.terminal_degree_constant, math.ceil(G.n ** delta))
    else:
        raise ValueError(f"unknown mode {mode!r}")

    log = RoundLog(total_space_cap=max(16 * (G.n + G.m),
                                       (1 + target) * max(1, G.n)))
    matched_g = np.zeros(G.n, dtype=bool)
    matching_ids: list[np.ndarray] = []
    phases: list = []
    rounds = 0

    H = G
    vmap = np.arange(G.n, dtype=np.int64)
    emap = np.arange(G.m, dtype=np.int64)
    failure = None

    while H.max_degree() > target:
        if len(phases) >= _PHASE_CAP:
            failure = f"phase cap {_PHASE_CAP} exceeded"
            break
        report = None
        for attempt in range(cfg.max_retries + 1):
            report = degree_reduction_phase(
                H, cfg, subseed(seed, 30, len(phases), attempt), log=log)
            rounds += report.round_cost
            if report.success:
                break
        if report is None or not report.success:
            failure = (f"phase {len(phases)} failed after "
                       f"{cfg.max_retries + 1} attempts")
            phases.append(_phase_summary(report, retries=cfg.max_retries))
            break
        phases.append(_phase_summary(report))
        matching_ids.append(emap[report.matching.edge_ids])
        matched_g[vmap[np.nonzero(report.matching.matched)[0]]] = True

        res = residual_degrees(H, report.matching)
        keep = (~report.matching.matched) & (res >= 1)
        sub = induced_subgraph(H, keep)
        vmap = vmap[sub.vertex_ids]
        emap = emap[sub.edge_ids]
        H = sub.graph

    if failure is None:
        rec = log.begin_round("finish", max(1, (1 + target) * max(1, H.n)),
                              H.max_degree())
        _charge(rec, 0, space_words(H.n, H.m))
        rounds += 1
        added = _greedy_on_edge_rows(H, np.arange(H.m, dtype=EDGE_DTYPE),
                                     range(H.m))
        if added:
            h_match = Matching.from_edge_ids(H, np.asarray(added))
            matching_ids.append(emap[h_match.edge_ids])
            matched_g[vmap[np.nonzero(h_match.matched)[0]]] = True

    ids = np.sort(np.concatenate(matching_ids)) if matching_ids \
        else np.empty(0, dtype=EDGE_DTYPE)
    M = Matching(ids, matched_g)
    check = verify_matching(G, M)
    return DriverResult(matching=M, valid=check.valid,
                        maximal=check.maximal and failure is None,
                        phases=phases, rounds=rounds,
                        space_clean=log.space_clean, round_log=log,
                        mode=mode, seed=int(seed),
                        failed=failure is not None, failure=failure)


def _phase_summary(report: PhaseReport | None, retries: int = 0) -> dict:
    if report is None:
        return {"failed": True}
    return {
        "delta": report.delta,
        "alg1_survivors": report.alg1_survivors,
        "post_survivors": report.high_degree_survivors,
        "residual_max_degree": report.residual_max_degree,
        "rounds": report.round_cost,
        "space_clean": report.space_clean,
        "success": report.success,
    }


def vertex_cover_2approx(G: Graph, M: Matching) -> np.ndarray:
    """Matched-vertex set of a maximal matching: covers every edge and is at
    most twice a minimum vertex cover."""
    check = verify_matching(G, M)
    if not (check.valid and check.maximal):
        raise ValueError(f"matching must be valid and maximal: {check.violation}")
    return np.nonzero(M.matched)[0]
