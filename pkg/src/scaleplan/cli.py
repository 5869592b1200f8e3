"""Command-line front end: ``scaleplan {fit,curve,plan-qubits,peak,simulate,advise}``.

Exit codes: 0 success, 1 input/parse/usage error, 2 domain error
(insufficient data, infeasible plan, invalid values).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import capacity, fitting, formats, scaling_models, synthetic
from .errors import DomainError, InsufficientDataError, ParseError, ScaleplanError
from .report import Report
from .scaling_models import ScalingParams

EXIT_OK, EXIT_INPUT, EXIT_DOMAIN = 0, 1, 2


class UsageError(ScaleplanError):
    pass


class _Parser(argparse.ArgumentParser):
    # usage errors are input errors (exit 1); exit 2 is reserved for domain errors
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _u64(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError(f"seed must be an unsigned 64-bit integer, got {text}")
    return value


def _emit(text: str, output: Optional[str]) -> None:
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


# -- fit ---------------------------------------------------------------------

def fit_report(observations, result: fitting.FitResult) -> Report:
    p = result.params
    rep = Report("Extended speedup fit")
    sec = rep.section("Parameters")
    sec.add("serial_fraction", p.serial_fraction)
    sec.add("comm_idle_fraction", p.comm_idle_fraction)
    sec.add("cores_per_node", p.cores_per_node)
    sec.add("baseline_time_hours", p.baseline_time)
    sec.add("optimal_node_count", result.optimal_node_count)
    sec.add("asymptotic_speedup", scaling_models.asymptotic_speedup(p.serial_fraction))
    sec.add("rms_relative_error", result.rms_relative_error)
    table = rep.section("Residuals", columns=("n_units", "observed_hours", "model_hours", "relative_residual", "censored"))
    for o in observations:
        model = p.baseline_time * scaling_models.extended_denominator(p, o.n_units)
        r = None if o.censored else (model - o.wall_time) / o.wall_time
        table.rows.append((o.n_units, o.wall_time, model, r, o.censored))
    rep.section("Outliers").add("n_units", list(result.outliers))
    return rep


def cmd_fit(args) -> int:
    observations = formats.read_timings(args.timings)
    result = fitting.fit_extended(observations, args.cores_per_node, args.threshold_k)
    _emit(fit_report(observations, result).render(args.format), args.output)
    return EXIT_OK


# -- curve -------------------------------------------------------------------

def params_from_fit_json(path: str) -> ScalingParams:
    try:
        doc = json.loads(Path(path).read_text())
        p = doc["parameters"]
        return ScalingParams(
            serial_fraction=float(p["serial_fraction"]),
            comm_idle_fraction=float(p["comm_idle_fraction"]),
            cores_per_node=int(p["cores_per_node"]),
            baseline_time=None if p.get("baseline_time_hours") is None else float(p["baseline_time_hours"]),
        )
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise ParseError(f"{path}: not a fit report written with --format json ({exc})") from None


def _collect_param_sets(args) -> list[tuple[str, ScalingParams]]:
    sets: list[tuple[str, ScalingParams]] = []
    if args.serial is not None:
        try:
            p = ScalingParams(
                formats.parse_fraction(args.serial),
                formats.parse_fraction(args.comm) if args.comm is not None else 0.0,
                args.cores_per_node,
                args.baseline,
            )
        except DomainError as exc:
            raise ParseError(str(exc)) from None
        sets.append((args.label or "model", p))
    for text in args.params or ():
        label, p = formats.parse_param_set(text)
        sets.append((label or f"set {len(sets) + 1}", p))
    for path in args.from_fit or ():
        sets.append((Path(path).stem, params_from_fit_json(path)))
    if not sets:
        raise UsageError("curve: give --serial, --params or --from-fit")
    return sets


def cmd_curve(args) -> int:
    n_values = formats.parse_n_values(args.n)
    sets = _collect_param_sets(args)
    curves = [(label, scaling_models.sample_curve(p, n_values, args.model, args.normalized)) for label, p in sets]
    _emit(formats.format_curves(curves), args.output)
    if args.svg:
        title = "Classical Amdahl speedup" if args.model == "classical" else "Extended speedup"
        series = [(label, [pt.n_units for pt in pts], [pt.speedup for pt in pts]) for label, pts in curves]
        Path(args.svg).write_text(formats.render_svg(series, title=title, log_x=args.log_x))
    return EXIT_OK


# -- plan-qubits -------------------------------------------------------------

def cmd_plan_qubits(args) -> int:
    spec = formats.read_cluster_spec(args.spec)
    kw = dict(
        bytes_per_amplitude=args.bytes_per_amplitude,
        buffer_factor=args.buffer_factor,
        usable_ram_fraction=formats.parse_fraction(args.usable_ram_fraction),
    )
    rep = Report("State-vector capacity plan")
    if args.target_qubits is not None:
        nodes = capacity.nodes_for_qubits(args.target_qubits, spec, round_to_power_of_two=not args.no_round, **kw)
        sec = rep.section("Nodes for target")
        sec.add("target_qubits", args.target_qubits)
        sec.add("nodes", nodes)
        sec.add("rounded_to_power_of_two", not args.no_round)
        plan = capacity.max_qubits(nodes, spec, **kw)
    else:
        plan = capacity.max_qubits(args.nodes, spec, **kw)
    sec = rep.section("Capacity")
    sec.add("nodes", plan.nodes)
    sec.add("max_qubits", plan.max_qubits)
    sec.add("min_qubits", plan.min_qubits)
    sec.add("bytes_required", plan.bytes_required)
    sec.add("bytes_available", plan.bytes_available)
    _emit(rep.render(args.format), args.output)
    return EXIT_OK


# -- peak --------------------------------------------------------------------

def cmd_peak(args) -> int:
    spec = formats.read_cluster_spec(args.spec)
    rpeak = capacity.peak_flops(spec, args.nodes)
    rep = Report("Peak performance")
    sec = rep.section("Peak")
    sec.add("nodes", args.nodes)
    sec.add("rpeak_flops", rpeak)
    sec.add("rpeak_tflops", rpeak / 1e12)
    if args.measured_flops is not None:
        measured = formats.parse_flops(args.measured_flops)
        eff = capacity.efficiency(measured, rpeak)
        sec.add("rmax_flops", measured)
        sec.add("efficiency", eff)
        sec.add("efficiency_percent", round(eff * 100, 2))
    if args.samples:
        stats = capacity.run_statistics([formats.parse_flops(s) for s in args.samples.split(",")])
        rs = rep.section("Repeated runs")
        rs.add("best_flops", stats.best)
        rs.add("mean_flops", stats.mean)
        rs.add("relative_spread", stats.relative_spread)
    _emit(rep.render(args.format), args.output)
    return EXIT_OK


# -- simulate ----------------------------------------------------------------

def cmd_simulate(args) -> int:
    config = formats.read_sim_config(args.config)
    if args.seed is not None:
        config = dataclasses.replace(config, seed=args.seed)
    _emit(formats.format_timings(synthetic.generate_timings(config)), args.output)
    return EXIT_OK


# -- advise ------------------------------------------------------------------

def cmd_advise(args) -> int:
    try:
        multiples = [int(m) for m in args.multiples.split(",")]
    except ValueError:
        raise ParseError(f"cannot parse multiples {args.multiples!r}") from None
    adv = fitting.advise_node_count(args.n_units, multiples)
    rep = Report(f"Node count advisory for N={adv.n_units}")
    sec = rep.section("Divisibility", columns=("multiple", "divides", "nearest_below", "nearest_above"))
    for m, (divides, below, above) in adv.multiples.items():
        sec.rows.append((m, divides, below, above))
    sec.note = "heuristic only; divisibility does not predict how a given code will scale"
    rep.section("Summary").add("power_of_two", adv.power_of_two).add("flagged", adv.flagged)
    _emit(rep.render(args.format), args.output)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("text", "json", "csv"), default="text")
    common.add_argument("--output", "-o", metavar="PATH", help="write to PATH instead of stdout")
    common.add_argument("--seed", type=_u64, default=None, help="unsigned 64-bit seed (simulate)")

    parser = _Parser(prog="scaleplan", description="Speedup modeling and cluster capacity planning")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("fit", parents=[common], help="fit S, C and T1 to a timing CSV")
    p.add_argument("timings")
    p.add_argument("--cores-per-node", type=int, required=True)
    p.add_argument("--threshold-k", type=float, default=fitting.DEFAULT_THRESHOLD_K)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("curve", parents=[common], help="sample speedup curves to CSV/SVG")
    p.add_argument("--serial", help="serial fraction, e.g. 0.01 or 1%%")
    p.add_argument("--comm", help="communication idle fraction")
    p.add_argument("--cores-per-node", type=int, default=1)
    p.add_argument("--baseline", type=float, help="single-unit wall time in hours")
    p.add_argument("--label")
    p.add_argument("--params", action="append", metavar="SET",
                   help="extra parameter set 'S=..,C=..,Nc=..,T1=..,label=..' (repeatable)")
    p.add_argument("--from-fit", action="append", metavar="JSON", help="fit report from 'fit --format json'")
    p.add_argument("--n", required=True, help="'1:1024', '1:1024:x2' or '1,24,96'")
    p.add_argument("--model", choices=("classical", "extended"), default="extended")
    p.add_argument("--normalized", action="store_true", help="rescale extended curves to start at 1")
    p.add_argument("--svg", metavar="PATH")
    p.add_argument("--log-x", action="store_true")
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("plan-qubits", parents=[common], help="state-vector memory capacity")
    p.add_argument("spec")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--nodes", type=int)
    g.add_argument("--target-qubits", type=int)
    p.add_argument("--bytes-per-amplitude", type=int, default=capacity.BYTES_PER_AMPLITUDE)
    p.add_argument("--buffer-factor", type=float, default=None)
    p.add_argument("--usable-ram-fraction", default="1.0")
    p.add_argument("--no-round", action="store_true", help="do not round node counts to powers of two")
    p.set_defaults(func=cmd_plan_qubits)

    p = sub.add_parser("peak", parents=[common], help="Rpeak and HPL efficiency")
    p.add_argument("spec")
    p.add_argument("--nodes", type=int, required=True)
    p.add_argument("--measured-flops", help="measured Rmax, e.g. 237T or 0.237P")
    p.add_argument("--samples", help="comma-separated repeated-run rates for spread statistics")
    p.set_defaults(func=cmd_peak)

    p = sub.add_parser("simulate", parents=[common], help="generate synthetic timing CSV")
    p.add_argument("config")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("advise", parents=[common], help="divisibility facts for a node count")
    p.add_argument("n_units", type=int)
    p.add_argument("--multiples", default="8,16")
    p.set_defaults(func=cmd_advise)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except InsufficientDataError as exc:
        print(f"error: insufficient data: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (UsageError, ParseError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
