"""Command-line entry point: ``bgmalloc generate|run|compare|validate``.

Exit codes: 0 success, 2 bad arguments, 3 infeasible scenario, 4 allocation
conflict, 5 oracle search space exceeded, 6 unreadable input file.
"""
from __future__ import annotations

import argparse
import json
import sys

from .bgm_sa import InfeasibleError
from .channel import WeightFileError
from .experiment import ConflictError, ExperimentConfig, compare_experiment, run_experiment
from .grid import (
    Allocation,
    AllocationError,
    ScenarioError,
    load_scenario,
    save_scenario,
    shared_intersection_scenario,
    validate_allocation,
)
from .oracle import SearchSpaceExceeded

EXIT_USAGE = 2
EXIT_INFEASIBLE = 3
EXIT_CONFLICT = 4
EXIT_ORACLE_LIMIT = 5
EXIT_INPUT = 6


def _sizes(text: str) -> list[int]:
    try:
        return [int(x) for x in text.replace(" ", "").split(",") if x]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _topology_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--scenario", help="scenario JSON file (overrides the generator flags)")
    p.add_argument("--clusters", type=int, help="number of clusters J")
    p.add_argument("--cluster-sizes", type=_sizes, help="comma-separated N_j, e.g. 100,90,80")
    p.add_argument("--intersection", type=int, default=0, help="vehicles shared by every cluster")
    p.add_argument("-K", type=int, default=7, help="subchannels per subframe")
    p.add_argument("-L", type=int, default=100, help="subframes")


def _experiment_args(p: argparse.ArgumentParser) -> None:
    _topology_args(p)
    p.add_argument("--algo", action="append", choices=["exhaustive", "bgm-sa", "bgm-pa"],
                   help="algorithm to run (repeatable)")
    p.add_argument("--metric", action="append", choices=["min", "max", "ave", "ivar", "mpm", "comb"],
                   help="BGM-PA group metric (repeatable)")
    p.add_argument("--runs", type=int, default=1)
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--weights-file", help="CSV weight matrix used for every run")
    p.add_argument("--sinr-mean", type=float, default=15.0, help="SINR mean in dB")
    p.add_argument("--sinr-std", type=float, default=8.0, help="SINR standard deviation in dB")
    p.add_argument("--sinr-corr", type=float, default=0.0, help="per-subframe SINR correlation")
    p.add_argument("--oracle-limit", type=int, default=10**8)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--save-allocations", action="store_true")
    p.add_argument("--out", required=True, help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bgmalloc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write a shared-intersection scenario file")
    _topology_args(gen)
    gen.add_argument("--out", required=True, help="scenario JSON path")

    run = sub.add_parser("run", help="Monte-Carlo runs of the allocators")
    _experiment_args(run)

    cmp_ = sub.add_parser("compare", help="optimality gap against exhaustive search")
    _experiment_args(cmp_)

    val = sub.add_parser("validate", help="check an allocation file against a scenario")
    val.add_argument("--scenario", required=True)
    val.add_argument("--allocation", required=True, help="allocation JSON or allocations.jsonl")
    return parser


def _check_topology(args) -> None:
    if args.scenario:
        return
    if not args.cluster_sizes:
        raise ValueError("need --scenario or --cluster-sizes")
    if args.clusters is not None and args.clusters != len(args.cluster_sizes):
        raise ValueError(f"--clusters {args.clusters} disagrees with {len(args.cluster_sizes)} cluster sizes")


def _config(args, default_algos) -> ExperimentConfig:
    _check_topology(args)
    return ExperimentConfig(
        algorithms=args.algo or default_algos,
        metrics=args.metric or ["min"],
        runs=args.runs,
        master_seed=args.seed,
        scenario_path=args.scenario,
        cluster_sizes=args.cluster_sizes,
        intersection=args.intersection,
        K=args.K,
        L=args.L,
        weights_file=args.weights_file,
        sinr_db_mean=args.sinr_mean,
        sinr_db_stddev=args.sinr_std,
        per_subframe_correlation=args.sinr_corr,
        oracle_limit=args.oracle_limit,
        workers=args.workers,
        save_allocations=args.save_allocations,
        out=args.out,
    )


def _validate(args) -> int:
    scenario = load_scenario(args.scenario)
    try:
        with open(args.allocation) as fh:
            text = fh.read()
    except OSError as exc:
        raise AllocationError(str(exc)) from exc
    docs = [json.loads(line) for line in text.splitlines() if line.strip()] if args.allocation.endswith(".jsonl") \
        else [json.loads(text)]
    failed = 0
    for doc in docs:
        report = validate_allocation(Allocation.from_dict(doc), scenario)
        tag = f"run {doc['run']} {doc['algorithm']}: " if "run" in doc else ""
        print(tag + report.describe())
        failed += not report.ok
    return EXIT_CONFLICT if failed else 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "generate":
            _check_topology(args)
            scenario = shared_intersection_scenario(args.cluster_sizes, args.intersection, args.K, args.L)
            save_scenario(scenario, args.out)
            print(f"wrote {args.out}: J={scenario.J}, N={scenario.vehicle_count}, K={args.K}, L={args.L}")
        elif args.command == "run":
            config = _config(args, ["bgm-sa", "bgm-pa"])
            records = run_experiment(config)
            print(f"{len(records)} runs x {len(config.labels())} algorithms -> {args.out}")
        elif args.command == "compare":
            config = _config(args, ["exhaustive", "bgm-sa", "bgm-pa"])
            report = compare_experiment(config)
            for alg in report.mean_gap:
                print(f"{alg:>14}: mean gap {report.mean_gap[alg]:.4%}  max gap {report.max_gap[alg]:.4%}")
        else:
            return _validate(args)
    except SearchSpaceExceeded as exc:
        print(f"error[oracle-limit]: {exc}", file=sys.stderr)
        return EXIT_ORACLE_LIMIT
    except ConflictError as exc:
        print(f"error[conflict]: {exc}", file=sys.stderr)
        return EXIT_CONFLICT
    except InfeasibleError as exc:
        print(f"error[infeasible]: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (OSError, WeightFileError, AllocationError, json.JSONDecodeError) as exc:
        print(f"error[input]: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ScenarioError, ValueError) as exc:
        print(f"error[parameter]: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return 0


if __name__ == "__main__":
    sys.exit(main())
