"""
Command-line interface: one subcommand per library operation.

Reports go to ``--out`` (standard output by default) as a flat key=value block,
a JSON object or a one-row CSV; logs and trace summaries go to standard error.
"""
import argparse
import contextlib
import csv
import json
import logging
import sys
from enum import Enum
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Tuple

from pydantic import ValidationError

from . import create_app
from .coloring import Coloring, coarsen, greedy_fairify
from .coloring_io import load_coloring, save_coloring
from .config import Settings
from .error_models import RainbowFqError, error_response
from .experiments import ceil_sqrt_cube, sweep, vinh_experiment
from .field import FieldSpec, make_field
from .generators import generate
from .geometry import count_triangles, count_unit_pairs, sqrt3, triangle_array, unit_circle
from .kinds import GeneratorKind, OutputFormat, SearchMode, SweepTask
from .models import GeneratorSpec, as_fraction
from .oracles import triangles_bruteforce, unit_circle_bruteforce
from .rainbow import RainbowService, default_u

logger = logging.getLogger(__name__)

Report = Dict[str, object]
Outcome = Tuple[Report, int]

ORACLE_TRIANGLE_LIMIT = 31


class UsageError(RainbowFqError):
    code = "usage_error"


# ---------- argument handling ----------

def _int_list(text: str) -> List[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _task_list(text: str) -> List[SweepTask]:
    try:
        return [SweepTask(part.strip()) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"tasks must be drawn from {[t.value for t in SweepTask]}")


def _field(args) -> FieldSpec:
    if args.p is None:
        raise UsageError("--p is required for this command")
    return make_field(args.p, args.k, modulus=args.modulus, seed=args.seed)


def _coloring(args) -> Coloring:
    if args.input is None:
        raise UsageError("--in is required for this command")
    expected = _field(args) if args.p is not None else None
    with open(args.input, "r", encoding="ascii") as source:
        return load_coloring(source, expected)


def _service(args) -> RainbowService:
    return RainbowService(threads=args.threads, block_size=args.block_size)


@contextlib.contextmanager
def _sink(args):
    if args.out is None:
        yield sys.stdout
    else:
        with open(args.out, "w", encoding="ascii", newline="") as handle:
            yield handle


def _summary(message: str) -> None:
    print(message, file=sys.stderr)


# ---------- report rendering ----------

def _json_value(value):
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, (tuple, list)):
        return [_json_value(item) for item in value]
    return value


def _text_value(value) -> str:
    value = _json_value(value)
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, list):
        return ",".join(str(item) for item in value)
    return str(value)


def render(report: Report, fmt: OutputFormat, sink) -> None:
    """Write a flat report in the requested format."""
    if fmt == OutputFormat.JSON:
        sink.write(json.dumps({key: _json_value(value) for key, value in report.items()}) + "\n")
    elif fmt == OutputFormat.CSV:
        writer = csv.DictWriter(sink, fieldnames=list(report), lineterminator="\n")
        writer.writeheader()
        writer.writerow({key: "" if value is None else _text_value(value) for key, value in report.items()})
    else:
        sink.writelines(f"{key}={_text_value(value)}\n" for key, value in report.items())


def _witness(triangle) -> Optional[Tuple[int, int, int]]:
    return triangle.indices if triangle is not None else None


# ---------- subcommands ----------

def cmd_circle(args) -> Outcome:
    field = _field(args)
    circle = unit_circle(field)
    return {"q": field.q, "circle_size": len(circle),
            "circle": [f"({v.x1.enc} {v.x2.enc})" for v in circle]}, 0


def cmd_pairs(args) -> Outcome:
    field = _field(args)
    ordered = count_unit_pairs(field)
    return {"q": field.q, "circle_size": len(unit_circle(field)),
            "ordered_pairs": ordered, "unordered_pairs": ordered // 2}, 0


def cmd_triangles(args) -> Outcome:
    field = _field(args)
    return {"q": field.q, "total_triangles": count_triangles(field, args.threads)}, 0


def cmd_sqrt3(args) -> Outcome:
    field = _field(args)
    root = sqrt3(field)
    return {"q": field.q, "sqrt3": root.enc if root is not None else None}, 0 if root is not None else 1


def cmd_find_rainbow(args) -> Outcome:
    report = _service(args).find_rainbow(_coloring(args), SearchMode(args.mode))
    return {
        "mode": report.mode,
        "total_triangles": report.total_triangles,
        "rainbow_count": report.rainbow_count,
        "mono_pairs": report.mono_pair_count,
        "witness": _witness(report.witness),
        "witness_colors": report.witness_colors,
    }, 0 if report.rainbow_count else 1


def cmd_rainbow_size2(args) -> Outcome:
    c = _coloring(args)
    triangle = _service(args).find_rainbow_size2(c)
    return {"witness": triangle.indices,
            "witness_colors": tuple(c.color_of(i) for i in triangle.indices)}, 0


def cmd_fairify(args) -> Outcome:
    fairified, trace = greedy_fairify(_coloring(args))
    _summary(f"t={trace.t} merges={len(trace.merges)} terminal={trace.terminal} max_size={trace.max_size}")
    with _sink(args) as sink:
        save_coloring(fairified.relabel(), sink)
    return {}, 0


def cmd_coarsen(args) -> Outcome:
    c = _coloring(args)
    u = as_fraction(args.u) if args.u is not None else default_u(c.field.q)
    coarsened, trace = coarsen(c, u)
    _summary(f"t={c.class_count} k={trace.k} u={u} branch={trace.branch.value} fallback={trace.fallback_used}")
    with _sink(args) as sink:
        save_coloring(coarsened, sink)
    return {}, 0


def cmd_pipeline(args) -> Outcome:
    if args.input is not None:
        c = _coloring(args)
    else:
        field = _field(args)
        c = generate(field, GeneratorSpec(kind=GeneratorKind.FAIR_RANDOM, color_count=args.colors or field.q,
                                          seed=args.seed, max_class_fraction=args.max_class_fraction))
    u = as_fraction(args.u) if args.u is not None else None
    report = _service(args).theorem_pipeline(c, u=u, escalate=not args.no_escalate)
    return {
        "t": report.t,
        "k": report.k,
        "u": report.u,
        "u_attempts": report.u_attempts,
        "witness": _witness(report.witness),
        "witness_colors": report.witness_colors,
        "coarsen_branch": report.coarsen_trace.branch,
        "refinement_chain_holds": report.refinement_chain_holds,
        "k_bound_holds": report.k_bound_holds,
        "max_class_fraction": report.max_class_fraction,
        "max_class_hypothesis_holds": report.max_class_hypothesis_holds,
        "class_size_condition": report.class_size_condition,
    }, 0 if report.witness is not None else 1


def cmd_example_degenerate(args) -> Outcome:
    field = _field(args)
    c = generate(field, GeneratorSpec(kind=GeneratorKind.DEGENERATE_EXAMPLE, seed=args.seed))
    bound = _service(args).no_rainbow_bound_check(c)
    return {
        "q": field.q,
        "colors": c.class_count,
        "blue_size": c.sizes[0],
        "total_triangles": bound.total_triangles,
        "rainbow_count": bound.rainbow_count,
        "mono_pairs": bound.mono_pairs,
        "bound_holds": bound.bound_holds,
    }, 0 if bound.rainbow_count else 1


def cmd_vinh(args) -> Outcome:
    field = _field(args)
    size = args.size if args.size is not None else min(ceil_sqrt_cube(field.q), field.q ** 2)
    with _sink(args) as sink:
        if args.format == OutputFormat.JSON:
            stats = vinh_experiment(field, size, args.trials, args.seed, threads=args.threads)
            sink.write(json.dumps([s.model_dump(mode="json") for s in stats]) + "\n")
        else:
            vinh_experiment(field, size, args.trials, args.seed, out=sink, threads=args.threads)
    return {}, 0


def cmd_sweep(args) -> Outcome:
    with _sink(args) as sink:
        sweep(args.q, args.tasks, args.seed, sink, threads=args.threads, color_count=args.colors,
              repeats=args.repeats, vinh_trials=args.trials)
    return {}, 0


def cmd_gen(args) -> Outcome:
    field = _field(args)
    kind = GeneratorKind(args.kind)
    spec = GeneratorSpec(kind=kind, color_count=args.colors or field.q, seed=args.seed,
                         max_class_fraction=args.max_class_fraction)
    c = generate(field, spec)
    with _sink(args) as sink:
        save_coloring(c, sink)
    return {}, 0


def cmd_verify(args) -> Outcome:
    if args.input is not None:
        if args.witness is None or len(args.witness) != 3:
            raise UsageError("--witness i,j,k is required with --in")
        verified = RainbowService.verify_witness(_coloring(args), args.witness)
        return {"witness": tuple(args.witness), "verified": verified}, 0 if verified else 1

    field = _field(args)
    circle_ok = sorted(v.index for v in unit_circle(field)) == sorted(v.index for v in unit_circle_bruteforce(field))
    pairs_ok = count_unit_pairs(field) == field.q ** 2 * len(unit_circle(field))
    triangles_ok = None
    if field.q <= ORACLE_TRIANGLE_LIMIT:
        fast = [tuple(row) for row in triangle_array(field, args.threads).tolist()]
        triangles_ok = fast == triangles_bruteforce(field)
    passed = circle_ok and pairs_ok and triangles_ok is not False
    if not passed:
        logger.error(f"Oracle self-check failed for F_{field.q}")
    return {"q": field.q, "circle_ok": circle_ok, "pairs_ok": pairs_ok,
            "triangles_ok": triangles_ok, "passed": passed}, 0 if passed else 1


COMMANDS: Dict[str, Tuple[Callable[[argparse.Namespace], Outcome], str]] = {
    "circle": (cmd_circle, "List the unit circle of F_q^2."),
    "pairs": (cmd_pairs, "Count unit-distance pairs."),
    "triangles": (cmd_triangles, "Count unit equilateral triangles."),
    "sqrt3": (cmd_sqrt3, "Square root of 3 used for apex construction."),
    "find-rainbow": (cmd_find_rainbow, "Search a coloring for rainbow unit triangles."),
    "rainbow-size2": (cmd_rainbow_size2, "Constructive search for colorings with classes of size <= 2."),
    "fairify": (cmd_fairify, "Greedy fairification of a coloring."),
    "coarsen": (cmd_coarsen, "Coarsen a coloring by group packing."),
    "pipeline": (cmd_pipeline, "Fairify, coarsen and search."),
    "example-degenerate": (cmd_example_degenerate, "Run the rainbow-free degenerate example."),
    "vinh": (cmd_vinh, "Unit-pair counts of random point subsets."),
    "sweep": (cmd_sweep, "Seeded experiment sweep over field orders."),
    "gen": (cmd_gen, "Generate a coloring file."),
    "verify": (cmd_verify, "Re-verify a witness, or self-check a field against brute force."),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--p", type=int, help="Field characteristic.")
    common.add_argument("--k", type=int, default=1, help="Extension degree (default 1).")
    common.add_argument("--modulus", type=_int_list, help="Monic irreducible modulus c0,c1,...,ck.")
    common.add_argument("--seed", type=int, default=0, help="Unsigned 64-bit seed (default 0).")
    common.add_argument("--format", type=OutputFormat, default=OutputFormat.TEXT,
                        choices=list(OutputFormat), help="Report format.")
    common.add_argument("--out", help="Output path (default standard output).")
    common.add_argument("--threads", type=int, help="Worker threads, 0 = auto.")
    common.add_argument("--in", dest="input", help="Coloring file.")
    common.add_argument("--log-level", help="Logging level name.")

    parser = argparse.ArgumentParser(prog="rainbowfq", description="Rainbow unit triangles over F_q^2.")
    sub = parser.add_subparsers(dest="command", required=True)
    parsers = {name: sub.add_parser(name, parents=[common], help=text) for name, (_, text) in COMMANDS.items()}

    parsers["find-rainbow"].add_argument("--mode", choices=[m.value for m in SearchMode],
                                         default=SearchMode.COUNT_ALL.value)
    for name in ("coarsen", "pipeline"):
        parsers[name].add_argument("--u", help="Coarsening parameter (default ceil(sqrt(q))).")
    for name in ("pipeline", "gen", "sweep"):
        parsers[name].add_argument("--colors", type=int, help="Number of colors (default q).")
    for name in ("pipeline", "gen"):
        parsers[name].add_argument("--max-class-fraction", type=as_fraction,
                                   help="Largest class as a fraction of q^2 (fair-random).")
    parsers["pipeline"].add_argument("--no-escalate", action="store_true",
                                     help="Stop after the first coarsening even without a witness.")
    parsers["gen"].add_argument("--kind", required=True, choices=[k.value for k in GeneratorKind])
    parsers["vinh"].add_argument("--size", type=int, help="Subset size (default ceil(q^{3/2})).")
    for name in ("vinh", "sweep"):
        parsers[name].add_argument("--trials", type=int, default=1, help="Subsets sampled per run.")
    parsers["sweep"].add_argument("--q", type=_int_list, required=True, help="Field orders, comma-separated.")
    parsers["sweep"].add_argument("--tasks", type=_task_list, default=[SweepTask.COUNTS],
                                  help="Tasks from counts,pipeline,vinh.")
    parsers["sweep"].add_argument("--repeats", type=int, default=1, help="Seeds per (q, task) cell.")
    parsers["verify"].add_argument("--witness", type=_int_list, help="Witness point indices i,j,k.")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """
    Parse arguments, run one subcommand and return its exit status:
    0 success or witness found, 1 searched and none, 2 usage or parse error,
    3 inadmissible field.
    """
    args = build_parser().parse_args(argv)
    handler, _ = COMMANDS[args.command]
    try:
        overrides = {}
        if args.threads is not None:
            overrides["threads"] = args.threads
        if args.log_level is not None:
            overrides["log_level"] = args.log_level
        settings = create_app(Settings.from_env().model_copy(update=overrides))
        args.threads = settings.threads
        args.block_size = settings.block_size
        report, status = handler(args)
    except RainbowFqError as exc:
        _report_error(args, exc.exit_code, error_response(exc).model_dump())
        return exc.exit_code
    except (ValidationError, ValueError, OSError) as exc:
        _report_error(args, 2, {"detail": str(exc), "code": "usage_error"})
        return 2
    if report:
        with _sink(args) as sink:
            render(report, args.format, sink)
    logger.info(f"Command {args.command} finished with status {status}")
    return status


def _report_error(args, status: int, payload: dict) -> None:
    logger.error(f"Command {args.command} failed: {payload['detail']}")
    if args.format == OutputFormat.JSON:
        print(json.dumps(payload), file=sys.stderr)
    else:
        print(f"error: {payload['detail']}", file=sys.stderr)
