"""Batch entry point: generate graphs, run the pipeline, verify lemma
suites, and sweep scaling experiments.

Every output carries the seed it was produced with; identical (config, seed)
pairs produce byte-identical files. Exit codes: 0 ok, 1 verification or
driver failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import suites
from .generators import parse_generator_spec, random_regular, star_forest
from .graph import load_graph_file, matching_to_json_dict, save_edge_list
from .harness import linear_slope, loglog_slope, write_csv, write_json
from .pipeline import PhaseConfig, maximal_matching_driver, partition_mm
from .rng import subseed

DEFAULT_SEED = 93450617

SWEEP_COLUMNS = [
    "class", "n", "delta_target", "delta_measured", "instance", "driver_seed",
    "phases", "rounds", "matching_size", "valid", "maximal",
    "survivor_fraction", "phase1_max_words", "phase1_budget",
    "alg1_rounds_clean", "space_clean",
]


def _add_config_flags(p: argparse.ArgumentParser):
    p.add_argument("--repetitions", type=int, default=None)
    p.add_argument("--terminal-degree", type=int, default=None)
    p.add_argument("--space-constant", type=float, default=None)
    p.add_argument("--p-exponent", type=float, default=None)
    p.add_argument("--k-exponent", type=float, default=None)


def _config_from_args(args) -> PhaseConfig:
    overrides = {}
    for flag, field in (("repetitions", "repetitions"),
                        ("terminal_degree", "terminal_degree_constant"),
                        ("space_constant", "space_constant"),
                        ("p_exponent", "p_exponent"),
                        ("k_exponent", "k_exponent")):
        value = getattr(args, flag, None)
        if value is not None:
            overrides[field] = value
    return PhaseConfig(**overrides)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mpcmatch",
        description="Partition-based maximal matching simulator and "
                    "verification harness")
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("gen", help="write a generated graph as an edge list")
    p_gen.add_argument("--gen", required=True, metavar="SPEC",
                       help="e.g. path:1000, erdos-renyi:5000,8")
    p_gen.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p_gen.add_argument("--out", required=True)

    p_match = sub.add_parser("match", help="run the matching pipeline")
    src = p_match.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", help="edge-list file")
    src.add_argument("--gen", metavar="SPEC")
    p_match.add_argument("--mode", choices=["loglog", "constant-delta"],
                         default="loglog")
    p_match.add_argument("--delta", type=float, default=None,
                         help="space exponent for constant-delta mode")
    p_match.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p_match.add_argument("--out", default=None, help="write summary JSON here")
    _add_config_flags(p_match)

    p_verify = sub.add_parser("verify", help="run a lemma-verification suite")
    p_verify.add_argument("suite", choices=["lipschitz", "tails",
                                            "oracle-equivalence",
                                            "efron-stein",
                                            "query-complexity", "survivors"])
    p_verify.add_argument("--trials", type=int, default=None)
    p_verify.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p_verify.add_argument("--p", type=float, default=None)
    p_verify.add_argument("--beta", type=float, default=None)
    p_verify.add_argument("--out", default=None)

    p_sweep = sub.add_parser("sweep", help="scaling sweep over max degree")
    p_sweep.add_argument("--classes", default="random-regular,star-forest")
    p_sweep.add_argument("--n", type=int, default=10000)
    p_sweep.add_argument("--deltas", default="16,32,64,128,256,512,1024")
    p_sweep.add_argument("--instances", type=int, default=1)
    p_sweep.add_argument("--driver-seeds", type=int, default=3)
    p_sweep.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p_sweep.add_argument("--star-k-exponent", type=float, default=0.3,
                         help="partition exponent override for star-forest "
                              "rows (spreads partition counts at small max "
                              "degree)")
    p_sweep.add_argument("--out", default=None, help="rows CSV path")
    p_sweep.add_argument("--summary", default=None, help="summary JSON path")
    _add_config_flags(p_sweep)
    return parser


def cmd_gen(args) -> int:
    G = parse_generator_spec(args.gen, seed=args.seed)
    save_edge_list(G, args.out)
    print(f"# seed={args.seed}")
    print(f"wrote {args.out}: n={G.n} m={G.m} max_degree={G.max_degree()}")
    return 0


def _load_input(args):
    if getattr(args, "input", None):
        G, report = load_graph_file(args.input)
        if report.self_loops:
            print(f"# skipped {len(report.self_loops)} self-loop line(s), "
                  f"first at line {report.self_loops[0][0]}", file=sys.stderr)
        return G
    return parse_generator_spec(args.gen, seed=args.seed)


def cmd_match(args) -> int:
    G = _load_input(args)
    cfg = _config_from_args(args)
    result = maximal_matching_driver(G, cfg, mode=args.mode,
                                     delta=args.delta, seed=args.seed)
    summary = result.summary_dict()
    print(f"# seed={args.seed}")
    print(f"n={G.n} m={G.m} max_degree={G.max_degree()}")
    print(f"phases={len(result.phases)} rounds={result.rounds} "
          f"matching_size={result.matching.size}")
    print(f"valid={result.valid} maximal={result.maximal} "
          f"space_clean={result.space_clean}")
    if args.out:
        doc = {"summary": summary,
               "matching": matching_to_json_dict(G, result.matching),
               "round_log": result.round_log.to_json_dict()}
        write_json(args.out, doc)
        print(f"wrote {args.out}")
    if result.failed or not (result.valid and result.maximal):
        print(f"FAILED: {result.failure or 'matching verification failed'}",
              file=sys.stderr)
        return 1
    return 0


def cmd_verify(args) -> int:
    seed = args.seed
    name = args.suite
    if name == "lipschitz":
        report = suites.lipschitz_suite(trials=args.trials or 1000, seed=seed)
    elif name == "tails":
        p_values = (args.p,) if args.p else (0.5, 0.2)
        betas = (args.beta,) if args.beta else (0.1, 0.05)
        report = suites.tails_suite(trials=args.trials or 2000, seed=seed,
                                    p_values=p_values, betas=betas)
    elif name == "oracle-equivalence":
        report = suites.oracle_equivalence_suite(
            seed=seed, random_instances=args.trials or 50)
    elif name == "efron-stein":
        report = suites.efron_stein_suite(trials=args.trials or 150, seed=seed)
    elif name == "query-complexity":
        report = suites.query_complexity_suite(draws=args.trials or 100,
                                               seed=seed)
    else:
        report = suites.survivors_suite(seeds=args.trials or 10, seed=seed)
    print(f"# seed={seed}")
    _print_report(name, report)
    if args.out:
        write_json(args.out, report)
        print(f"wrote {args.out}")
    return 0 if report["passed"] else 1


def _print_report(name, report, indent=""):
    for key, value in report.items():
        if isinstance(value, dict):
            _print_report(key, value, indent + "  ")
        elif isinstance(value, list) and value and isinstance(value[0], dict):
            for i, item in enumerate(value):
                _print_report(f"{key}[{i}]", item, indent + "  ")
        else:
            print(f"{indent}{name}.{key} = {value}")
    if "passed" in report:
        print(f"{indent}{name}: {'PASS' if report['passed'] else 'FAIL'}")


_CLASS_IDS = {"random-regular": 0, "star-forest": 1, "erdos-renyi": 2}


def _make_instance(cls: str, n: int, delta: int, seed: int):
    if cls == "random-regular":
        if (n * delta) % 2:
            n += 1
        return random_regular(n, delta, seed)
    if cls == "star-forest":
        return star_forest(n, delta)
    if cls == "erdos-renyi":
        from .generators import erdos_renyi

        return erdos_renyi(n, float(delta), seed)
    raise ValueError(f"unknown sweep class {cls!r}")


def sweep_rows(classes, n, deltas, instances, driver_seeds, seed,
               star_k_exponent=0.3, base_cfg: PhaseConfig | None = None):
    """Run the sweep grid and return one row dict per (instance, driver
    seed). Star-forest rows use the k-exponent override; other classes run
    the faithful defaults."""
    base_cfg = base_cfg or PhaseConfig()
    rows = []
    for cls in classes:
        cid = _CLASS_IDS[cls]
        cfg = base_cfg.with_overrides(k_exponent=star_k_exponent) \
            if cls == "star-forest" else base_cfg
        for delta in deltas:
            for inst in range(instances):
                G = _make_instance(cls, n, delta, subseed(seed, cid, delta, inst))
                measured = G.max_degree()
                for ds in range(driver_seeds):
                    driver_seed = subseed(seed, 1, cid, delta, inst, ds)
                    result = maximal_matching_driver(G, cfg, seed=driver_seed)
                    single = partition_mm(
                        G, cfg, subseed(seed, 2, cid, delta, inst, ds))
                    log = result.round_log
                    phase1 = next((r for r in log.rounds
                                   if r.label == "alg1-route"), None)
                    alg1_clean = not any(
                        r.violations for r in log.rounds
                        if r.label.startswith("alg1"))
                    rows.append({
                        "class": cls, "n": G.n, "delta_target": delta,
                        "delta_measured": measured, "instance": inst,
                        "driver_seed": ds, "phases": len(result.phases),
                        "rounds": result.rounds,
                        "matching_size": result.matching.size,
                        "valid": result.valid, "maximal": result.maximal,
                        "survivor_fraction":
                            single.high_degree_survivors / max(1, G.n),
                        "phase1_max_words":
                            phase1.max_words() if phase1 else 0,
                        "phase1_budget": phase1.budget if phase1 else 0,
                        "alg1_rounds_clean": alg1_clean,
                        "space_clean": result.space_clean,
                    })
                del G
    return rows


def _medians_by_delta(rows, field):
    deltas = sorted({r["delta_target"] for r in rows})
    out = []
    for d in deltas:
        vals = [r[field] for r in rows if r["delta_target"] == d]
        out.append(float(np.median(vals)))
    return deltas, out


def sweep_summary(rows, seed) -> dict:
    """Fitted slopes and medians per class, for the scaling assertions."""
    summary = {"schema": "mpcmatch.sweep-summary/1", "seed": seed,
               "classes": {}}
    for cls in sorted({r["class"] for r in rows}):
        sub = [r for r in rows if r["class"] == cls]
        deltas, med_phases = _medians_by_delta(sub, "phases")
        _, med_surv = _medians_by_delta(sub, "survivor_fraction")
        _, med_words = _medians_by_delta(sub, "phase1_max_words")
        entry = {
            "deltas": deltas,
            "median_phases": med_phases,
            "median_survivor_fraction": med_surv,
            "median_phase1_max_words": med_words,
            "all_alg1_rounds_clean": all(r["alg1_rounds_clean"] for r in sub),
            "all_valid_maximal": all(r["valid"] and r["maximal"] for r in sub),
        }
        if all(w > 0 for w in med_words):
            entry["words_loglog_slope"] = loglog_slope(deltas, med_words)
        if all(f > 0 for f in med_surv):
            entry["survivor_loglog_slope"] = loglog_slope(deltas, med_surv)
        if len(deltas) >= 2:
            x = np.log2(np.log2(np.asarray(deltas, dtype=float)))
            entry["phases_vs_loglog_slope"] = linear_slope(x, med_phases)
            entry["phases_span"] = med_phases[-1] - med_phases[0]
        summary["classes"][cls] = entry
    return summary


def cmd_sweep(args) -> int:
    classes = [c.strip() for c in args.classes.split(",") if c.strip()]
    deltas = [int(d) for d in args.deltas.split(",") if d.strip()]
    cfg = _config_from_args(args)
    rows = sweep_rows(classes, args.n, deltas, args.instances,
                      args.driver_seeds, args.seed,
                      star_k_exponent=args.star_k_exponent, base_cfg=cfg)
    summary = sweep_summary(rows, args.seed)
    print(f"# seed={args.seed}")
    print(f"rows={len(rows)}")
    for cls, entry in summary["classes"].items():
        print(f"{cls}: deltas={entry['deltas']}")
        print(f"  median_phases={entry['median_phases']}")
        print(f"  median_survivor_fraction="
              f"{[round(f, 6) for f in entry['median_survivor_fraction']]}")
        for key in ("words_loglog_slope", "survivor_loglog_slope",
                    "phases_vs_loglog_slope"):
            if key in entry:
                print(f"  {key}={entry[key]:.4f}")
    if args.out:
        write_csv(args.out, rows, SWEEP_COLUMNS)
        print(f"wrote {args.out}")
    if args.summary:
        write_json(args.summary, summary)
        print(f"wrote {args.summary}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "gen":
            return cmd_gen(args)
        if args.command == "match":
            return cmd_match(args)
        if args.command == "verify":
            return cmd_verify(args)
        if args.command == "sweep":
            return cmd_sweep(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 2


if __name__ == "__main__":
    sys.exit(main())
