#!/usr/bin/env python3
"""
Command line interface for the cluster scheduling simulator

    simulate   run one configuration or a sweep over policies x racks x seeds
    gen-trace  write a synthetic job trace
    compare    summarize a finished sweep against a target policy
"""

import argparse
import copy
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

# Add the project root to Python path
sys.path.insert(0, str(Path(__file__).parent.parent))

from core.engine import SimConfig, run_simulation
from core.exceptions import ConfigError, SimulatorError, ValidationError
from core.latency import ProfileCatalog, build_latency_model
from core.topology import ClusterTopology
from database.models import RunRecord
from database.results_db import ResultsDatabase
from reporting.comparison import RESULTS_DB_NAME, average_by_policy, compare_policies, format_comparison, load_runs
from reporting.writer import write_outputs
from scheduler import POLICY_NAMES, build_policy
from utils.config import Config, parse_override
from utils.log_utils import setup_logging
from workload.generator import build_workload, gen_trace, parse_demand_weights, parse_range
from workload.trace import load_trace

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_SIMULATION_ERROR = 1
EXIT_VALIDATION_ERROR = 2


@dataclass
class RunRequest:
    policy: str
    num_racks: int
    seed: int
    settings: Dict[str, Any]
    out_dir: str

    @property
    def run_name(self) -> str:
        return run_name(self.policy, self.num_racks, self.seed)


def run_name(policy: str, num_racks: int, seed: int) -> str:
    return f"{policy}_r{num_racks}_s{seed}"


def parse_int_list(text: str) -> List[int]:
    try:
        values = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer or comma list, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="main.py", description="GPU cluster scheduling simulator")
    sub = parser.add_subparsers(dest="command")

    sim = sub.add_parser("simulate", help="Run simulations and write outputs")
    sim.add_argument("--config", help="JSON configuration file")
    sim.add_argument("--policy", help=f"One of {', '.join(POLICY_NAMES)}, or all")
    sim.add_argument("--racks", type=parse_int_list, help="Rack count or comma list, e.g. 2,4,8")
    sim.add_argument("--seed", type=parse_int_list, help="Seed or comma list")
    sim.add_argument("--out", help="Output directory")
    sim.add_argument("--trace", help="Trace CSV file")
    sim.add_argument("--arrival", choices=["batch", "poisson"], help="Arrival mode")
    sim.add_argument("--rate", type=float, help="Poisson arrival rate (jobs/s)")
    sim.add_argument("--jobs", type=int, default=1, help="Parallel worker processes for a sweep")
    sim.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                     help="Override any dotted configuration key")
    sim.add_argument("--log-level", help="DEBUG, INFO, WARNING, ...")

    gen = sub.add_parser("gen-trace", help="Write a synthetic trace")
    gen.add_argument("--n-jobs", type=int, required=True)
    gen.add_argument("--models", help="Comma list of models (default: every profiled model)")
    gen.add_argument("--demand-weights", help="e.g. 8=0.9,16=0.1 (default: uniform over 1..32)")
    gen.add_argument("--iterations", default="1000:10000", help="MIN:MAX iterations")
    gen.add_argument("--compute", default="0.1:1.0", help="MIN:MAX compute seconds per iteration")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--profiles", help="Model profile CSV (default: shipped profiles)")
    gen.add_argument("--out", required=True)

    cmp_ = sub.add_parser("compare", help="Compare policies across a finished sweep")
    cmp_.add_argument("--results", required=True, help="Sweep output directory holding results.db")
    cmp_.add_argument("--target", default="dally")
    return parser


def load_run_config(args: argparse.Namespace) -> Config:
    """Config file, then command-line overrides, which always win"""
    config = Config(args.config)
    for item in args.set:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        key, value = item.split("=", 1)
        config.set_nested(key.strip(), parse_override(value))
    direct = {
        "policy.name": args.policy,
        "output.dir": args.out,
        "workload.trace": args.trace,
        "workload.arrival": args.arrival,
        "workload.rate": args.rate,
        "log_level": args.log_level,
    }
    for key, value in direct.items():
        if value is not None:
            config.set_nested(key, value)
    if args.racks and len(args.racks) == 1:
        config.set_nested("topology.num_racks", args.racks[0])
    if args.seed and len(args.seed) == 1:
        config.set_nested("workload.seed", args.seed[0])
    return config


def plan_runs(config: Config, racks: Optional[Sequence[int]], seeds: Optional[Sequence[int]]) -> List[RunRequest]:
    name = config.get("policy.name")
    policies = list(POLICY_NAMES) if name == "all" else [name]
    racks = list(racks or [config.get("topology.num_racks")])
    seeds = list(seeds or [config.get("workload.seed")])
    out_dir = config.get("output.dir")
    settings = config.get_all()

    requests = []
    for policy in policies:
        for num_racks in racks:
            if num_racks < 1:
                raise ConfigError(f"--racks values must be >= 1, got {num_racks}")
            for seed in seeds:
                effective = copy.deepcopy(settings)
                effective["policy"]["name"] = policy
                effective["topology"]["num_racks"] = num_racks
                effective["workload"]["seed"] = seed
                requests.append(RunRequest(policy, num_racks, seed, effective, out_dir))
    return requests


def execute_run(request: RunRequest) -> RunRecord:
    """One simulation, start to finish. Runs in the parent or in a pool worker."""
    settings = request.settings
    setup_logging(settings.get("log_level", "INFO"))

    topo = ClusterTopology.from_config(settings["topology"])
    catalog = ProfileCatalog.load(settings["latency"]["profiles"])
    workload_section = settings["workload"]
    jobs = load_trace(workload_section["trace"], catalog)
    workload = build_workload(jobs, workload_section["arrival"], workload_section.get("rate"), request.seed)

    report = run_simulation(
        workload, topo,
        build_policy(request.policy, settings),
        build_latency_model(settings["latency"]),
        catalog,
        SimConfig.from_config(settings["engine"], seed=request.seed),
        machine_hour_usd=settings["metrics"]["machine_hour_usd"],
    )
    target = Path(request.out_dir) / request.run_name
    write_outputs(report, target, effective_config=settings)
    return RunRecord.from_report(request.run_name, report, str(target))


def run_sweep(requests: Sequence[RunRequest], workers: int = 1) -> List[RunRecord]:
    if workers > 1 and len(requests) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(execute_run, requests))
    return [execute_run(request) for request in requests]


def cmd_simulate(args: argparse.Namespace) -> int:
    config = load_run_config(args)
    setup_logging(config.get("log_level"))
    config.validate(require_trace=True)
    if args.jobs < 1:
        raise ConfigError("--jobs must be >= 1")

    requests = plan_runs(config, args.racks, args.seed)
    print(f"Running {len(requests)} simulation(s) into {config.get('output.dir')}")
    records = run_sweep(requests, args.jobs)

    db_path = Path(config.get("output.dir")) / RESULTS_DB_NAME
    with ResultsDatabase(str(db_path)) as db:
        for record in records:
            db.record_run(record)
            print(f"✓ {record.run_name}: makespan {record.makespan:.1f} s, "
                  f"mean JCT {record.mean_jct:.1f} s, mean comm {record.mean_comm_latency:.1f} s")
    return EXIT_OK


def cmd_gen_trace(args: argparse.Namespace) -> int:
    catalog = ProfileCatalog.load(args.profiles)
    models = [m.strip().lower() for m in args.models.split(",")] if args.models else catalog.model_names
    for model in models:
        catalog.get(model)
    weights = parse_demand_weights(args.demand_weights) if args.demand_weights else None
    path = gen_trace(
        n_jobs=args.n_jobs,
        models=models,
        demand_weights=weights,
        iteration_range=parse_range(args.iterations, int),
        compute_range=parse_range(args.compute, float),
        seed=args.seed,
        out_path=args.out,
    )
    print(f"✓ Wrote {args.n_jobs} jobs to {path}")
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    runs = load_runs(args.results)
    print("Policy averages across seeds:")
    for avg in average_by_policy(runs):
        print(f"  r{avg.num_racks:<3} {avg.policy:<24} seeds={avg.seeds:<3} "
              f"makespan={avg.metrics['makespan']:.1f} mean_jct={avg.metrics['mean_jct']:.1f}")
    print(f"\nImprovement of {args.target} over each baseline:")
    print(format_comparison(compare_policies(runs, args.target)))
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "gen-trace": cmd_gen_trace,
    "compare": cmd_compare,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not args.command:
        parser.print_help()
        return EXIT_VALIDATION_ERROR
    try:
        return COMMANDS[args.command](args)
    except (ValidationError, FileNotFoundError) as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_VALIDATION_ERROR
    except SimulatorError as e:
        print(f"Simulation failed: {e}", file=sys.stderr)
        return EXIT_SIMULATION_ERROR
    except KeyboardInterrupt:
        print("\nInterrupted")
        return EXIT_SIMULATION_ERROR


if __name__ == "__main__":
    sys.exit(main())
