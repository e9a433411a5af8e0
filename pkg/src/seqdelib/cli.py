# src/seqdelib/cli.py
"""
Command-line front end.

    seqdelib simulate [--scheme nash] [--seed 42] [--out results]
    seqdelib theory [--f 0.5]
    seqdelib experiment NAME [--runs R] [--f F] [--k K] [--epsilon E] [--graph PATH]
    seqdelib validate-space PATH

Summaries go to stdout, bulk data to files under --out, diagnostics to stderr.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional, Sequence

from seqdelib.analytics import (
    ONE_SHOT_MEDIAN_LOWER_BOUND,
    PAIRWISE_LOWER_BOUND,
    SHORTEST_PATH_LOWER_BOUND,
    STATIONARY_UPPER_BOUND,
    distortion_table,
    stationary_bit_probability,
    stationary_curve,
    stationary_distortion,
    worst_case_distortion,
)
from seqdelib.deliberation import trace_table
from seqdelib.errors import InputError, SeqDelibError, StructuralError, UnsupportedSpaceError
from seqdelib.experiments import (
    DEFAULT_SEED,
    DEFAULT_SIZES,
    EXPERIMENTS,
    FORMATS,
    NUM_AGENTS,
    NUM_RUNS,
    NUM_STEPS,
    SCHEMES,
    SEED_ENV,
    ExperimentParams,
    SimulationConfig,
    population_table,
    resolve_seed,
    run_experiment,
    simulate,
)
from seqdelib.population import PopulationSpec
from seqdelib.spaces import DecisionSpace, validate_median_graph

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # raise instead of exiting
    def error(self, message):
        raise _UsageError(f"{self.prog}: error: {message}")


def _seed(text: str) -> int:
    value = int(text, 16) if text.lower().startswith("0x") else int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError(f"seed must be an unsigned 64-bit integer, got {text}")
    return value


def _space(text: str) -> tuple[str, Optional[str]]:
    if text.startswith("graph:"):
        return "graph", text.removeprefix("graph:")
    if text not in ("line", "hypercube", "star"):
        raise argparse.ArgumentTypeError(f"expected line, hypercube, star or graph:<path>, got {text!r}")
    return text, None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="seqdelib", description="Sequential deliberation simulator")
    parser.add_argument("--verbose", action="store_true", help="debug logging on stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sim = sub.add_parser("simulate", help="Monte Carlo simulation of one scheme")
    sim.add_argument("--space", type=_space, default=("line", None), help="line, hypercube, star or graph:<path>")
    sim.add_argument("--alternatives", type=int, default=None, help="default 50 (line), 1024 (hypercube), 50 (star)")
    sim.add_argument("--agents", type=int, default=NUM_AGENTS)
    sim.add_argument("--steps", type=int, default=NUM_STEPS)
    sim.add_argument("--runs", type=int, default=NUM_RUNS)
    sim.add_argument("--scheme", choices=SCHEMES, default="nash")
    sim.add_argument("--seed", type=_seed, default=None, help=f"master seed (env {SEED_ENV}, default {DEFAULT_SEED})")
    sim.add_argument("--shift-scale", type=float, default=None)
    sim.add_argument("--epsilon", type=float, default=None, help="use ε-unanimous populations")
    sim.add_argument("--out", default="results")
    sim.add_argument("--format", choices=FORMATS, default="json")
    sim.add_argument("--workers", type=int, default=None)
    sim.add_argument("--progress", action="store_true")
    sim.add_argument("--populations", action="store_true", help="also write populations.csv")

    theory = sub.add_parser("theory", help="closed-form stationary distortion")
    theory.add_argument("--f", type=float, default=None, help="evaluate a single bit frequency")
    theory.add_argument("--out", default="results")

    exp = sub.add_parser("experiment", help="run a named experiment")
    exp.add_argument("name", choices=sorted(EXPERIMENTS))
    exp.add_argument("--runs", type=int, default=None)
    exp.add_argument("--steps", type=int, default=NUM_STEPS)
    exp.add_argument("--seed", type=_seed, default=None, help=f"env {SEED_ENV}, default {DEFAULT_SEED}")
    exp.add_argument("--f", type=float, default=None)
    exp.add_argument("--k", type=int, default=None)
    exp.add_argument("--epsilon", type=float, default=None)
    exp.add_argument("--graph", default=None, help="edge list for general-graph")
    exp.add_argument("--out", default="results")

    val = sub.add_parser("validate-space", help="check that an edge list is a median graph")
    val.add_argument("path")
    return parser


def configure_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format=LOG_FORMAT,
        stream=sys.stderr,
        force=True,
    )


# -------------------------------
# Subcommands
# -------------------------------


def _simulate(args: argparse.Namespace) -> int:
    kind, graph_path = args.space
    config = SimulationConfig.from_env(
        space=kind,
        alternatives=args.alternatives or DEFAULT_SIZES.get(kind),
        graph_path=graph_path,
        population=PopulationSpec(args.agents),
        scheme=args.scheme,
        steps=args.steps,
        runs=args.runs,
        master_seed=args.seed,
        shift_scale=args.shift_scale,
        epsilon=args.epsilon,
        out=args.out,
        format=args.format,
        workers=args.workers,
        progress=args.progress,
    )
    space = config.build_space()
    result = simulate(config, space)
    report = result.report

    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    distortion_table(result.distortions).to_csv(out / "distortions.csv", index=False)
    trace_table(space, [t for t in result.traces if t is not None]).to_csv(out / "traces.csv", index=False)
    if config.format == "json":
        report.to_json(out / "report.json")
    else:
        report.per_step_table().to_csv(out / "per_step.csv", index=False)
    if args.populations:
        population_table(space, result).to_csv(out / "populations.csv", index=False)
    logger.info("Outputs written to %s", out)

    print(f"scheme={report.scheme} runs={report.runs} steps={report.steps} seed={config.master_seed}")
    print(f"mean={report.mean:.4f} q1={report.q1:.4f} q3={report.q3:.4f} "
          f"second_moment={report.second_moment:.4f} infinite={report.infinite_count}")
    if report.pareto_fraction is not None:
        print(f"pareto_fraction={report.pareto_fraction:.4f}")
    return EXIT_OK


def _theory(args: argparse.Namespace) -> int:
    if args.f is not None:
        print(f"f={args.f} pi1={stationary_bit_probability(args.f):.6f} "
              f"distortion={stationary_distortion(args.f):.6f}")
        return EXIT_OK

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    stationary_curve().to_csv(out / "stationary_curve.csv", index=False)
    f_star, value = worst_case_distortion()
    print(f"worst_case f*={f_star:.6f} distortion={value:.6f} (bound {STATIONARY_UPPER_BOUND})")
    print(f"bounds pairwise_lower={PAIRWISE_LOWER_BOUND} shortest_path_lower={SHORTEST_PATH_LOWER_BOUND} "
          f"stationary_upper={STATIONARY_UPPER_BOUND} one_shot_median_lower={ONE_SHOT_MEDIAN_LOWER_BOUND}")
    return EXIT_OK


def _experiment(args: argparse.Namespace) -> int:
    params = ExperimentParams(
        seed=resolve_seed(args.seed), runs=args.runs, steps=args.steps, f=args.f, k=args.k,
        epsilon=args.epsilon, graph_path=args.graph,
    )
    result = run_experiment(args.name, params)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / f"{args.name}.json").write_text(json.dumps(result, indent=2, sort_keys=True) + "\n")
    print(" ".join(f"{k}={v}" for k, v in result.items()))
    return EXIT_OK


def _validate_space(args: argparse.Namespace) -> int:
    space = DecisionSpace.from_edge_list(args.path)
    if validate_median_graph(space):
        print(f"{args.path}: median graph ({space.size} vertices)")
        return EXIT_OK
    print(f"{args.path}: not a median graph")
    return EXIT_FAILURE


COMMANDS = {
    "simulate": _simulate,
    "theory": _theory,
    "experiment": _experiment,
    "validate-space": _validate_space,
}


def parse_and_dispatch(argv: Sequence[str]) -> int:
    """Run one command line; returns the process exit status."""
    try:
        args = build_parser().parse_args(list(argv))
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    configure_logging(args.verbose)

    try:
        return COMMANDS[args.command](args)
    except StructuralError as exc:
        # disconnected or non-median inputs
        print(f"error: {exc}", file=sys.stderr)
        if args.command == "validate-space":
            print(f"{args.path}: not a median graph")
        return EXIT_FAILURE
    except (InputError, UnsupportedSpaceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, SeqDelibError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


def main(argv: Optional[List[str]] = None) -> int:
    return parse_and_dispatch(sys.argv[1:] if argv is None else argv)
