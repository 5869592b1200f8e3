"""
File formats.

Timing CSV::

    # comments start with '#'
    n_units,wall_time_hours,censored
    1,89.3,0
    112,100.0,1

Cluster spec (TOML, flat)::

    cores = 32
    clock_ghz = 2.1
    flops_per_cycle = 32
    ram_gib = 376          # or ram_gb = ... for decimal gigabytes
    ranks_per_node = 32    # optional, defaults to cores

Simulation config (TOML)::

    serial_fraction = "1.07%"
    comm_idle_fraction = 0.00244
    cores_per_node = 32
    baseline_time_hours = 89.3
    node_counts = [1, 2, 4, 8, 16, 32, 64, 128]
    jitter_fraction = 0.1
    seed = 7
    censor_cutoff_hours = 100      # optional
    [pathological_nodes]
    112 = 50

Unknown keys are rejected.
"""

from __future__ import annotations

import csv
import io
import math
import sys
from decimal import Decimal, InvalidOperation
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterable, Sequence, Union

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .capacity import GB, GIB, ClusterNodeSpec
from .errors import DomainError, ParseError
from .fitting import TimingObservation
from .scaling_models import ScalingParams
from .synthetic import SimulationConfig

TIMING_HEADER = ("n_units", "wall_time_hours", "censored")
CURVE_HEADER = ("n", "speedup", "predicted_time_hours")

PathLike = Union[str, Path]


def parse_fraction(text: Union[str, float, int]) -> float:
    """'1%' -> 0.01, '0.01' -> 0.01. Numbers pass through unchanged."""
    if isinstance(text, bool):
        raise ParseError(f"not a number: {text!r}")
    if isinstance(text, (int, float)):
        return float(text)
    s = text.strip()
    percent = s.endswith("%")
    if percent:
        s = s[:-1].strip()
    try:
        value = Decimal(s)
    except InvalidOperation:
        raise ParseError(f"not a number or percentage: {text!r}") from None
    if not value.is_finite():
        raise ParseError(f"not a finite number: {text!r}")
    # a single decimal -> binary rounding, so "1.07%" gives exactly float("0.0107")
    return float(value / 100 if percent else value)


_SI = {"": 1.0, "k": 1e3, "M": 1e6, "G": 1e9, "T": 1e12, "P": 1e15, "E": 1e18}


def parse_flops(text: str) -> float:
    """'237T', '0.237P', '2.37e14' or '237 TFlops' -> flop/s."""
    s = text.strip()
    for suffix in ("flop/s", "flops", "Flop/s", "Flops", "FLOPS", "FLOP/s"):
        if s.endswith(suffix):
            s = s[: -len(suffix)].strip()
            break
    prefix = s[-1:] if s[-1:] in _SI and s[-1:] != "" else ""
    if prefix:
        s = s[:-1].strip()
    try:
        value = float(s) * _SI[prefix]
    except ValueError:
        raise ParseError(f"cannot parse flop rate {text!r}") from None
    return value


def format_float(x: float) -> str:
    # repr is the shortest string that round-trips exactly
    return repr(float(x))


# -- timing CSV --------------------------------------------------------------

def read_timings(source: Union[PathLike, io.TextIOBase]) -> list[TimingObservation]:
    if isinstance(source, (str, Path)):
        text = Path(source).read_text()
    else:
        text = source.read()
    return parse_timings(text)


def parse_timings(text: str) -> list[TimingObservation]:
    rows = []
    header_seen = False
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        fields = [f.strip() for f in next(csv.reader([stripped]))]
        if not header_seen:
            if tuple(fields) != TIMING_HEADER:
                raise ParseError(f"expected header {','.join(TIMING_HEADER)!r}, got {stripped!r}", lineno)
            header_seen = True
            continue
        if len(fields) != 3:
            raise ParseError(f"expected 3 fields, got {len(fields)}", lineno)
        try:
            n = int(fields[0])
            t = float(fields[1])
        except ValueError:
            raise ParseError(f"malformed row {stripped!r}", lineno) from None
        if fields[2] not in ("0", "1"):
            raise ParseError(f"censored must be 0 or 1, got {fields[2]!r}", lineno)
        try:
            rows.append(TimingObservation(n, t, fields[2] == "1"))
        except DomainError as exc:
            raise ParseError(str(exc), lineno) from None
    if not header_seen:
        raise ParseError("missing header line")
    return rows


def format_timings(observations: Iterable[TimingObservation]) -> str:
    lines = [",".join(TIMING_HEADER)]
    for o in observations:
        lines.append(f"{o.n_units},{format_float(o.wall_time)},{int(o.censored)}")
    return "\n".join(lines) + "\n"


def write_timings(path: PathLike, observations: Iterable[TimingObservation]) -> None:
    Path(path).write_text(format_timings(observations))


# -- curve CSV ---------------------------------------------------------------

def format_curve(points, label: str | None = None) -> str:
    """Curve CSV. A leading ``label`` column is added only when ``label`` is given."""
    header = CURVE_HEADER if label is None else ("label",) + CURVE_HEADER
    lines = [",".join(header)]
    lines.extend(_curve_rows(points, label))
    return "\n".join(lines) + "\n"


def format_curves(curves: Sequence[tuple[str, list]]) -> str:
    if len(curves) == 1:
        return format_curve(curves[0][1])
    lines = [",".join(("label",) + CURVE_HEADER)]
    for label, points in curves:
        lines.extend(_curve_rows(points, label))
    return "\n".join(lines) + "\n"


def _curve_rows(points, label):
    for p in points:
        t = "" if p.predicted_time is None else format_float(p.predicted_time)
        row = f"{p.n_units},{format_float(p.speedup)},{t}"
        yield row if label is None else f"{label},{row}"


# -- TOML documents ----------------------------------------------------------

def _load_toml(path: PathLike) -> dict[str, Any]:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from None


def _reject_unknown(doc: dict, allowed: set[str], what: str) -> None:
    unknown = sorted(set(doc) - allowed)
    if unknown:
        raise ParseError(f"unknown {what} key(s): {', '.join(unknown)}")


def _require(doc: dict, key: str, kind, what: str):
    if key not in doc:
        raise ParseError(f"{what} is missing required key {key!r}")
    value = doc[key]
    if kind is int and (isinstance(value, bool) or not isinstance(value, int)):
        raise ParseError(f"{key} must be an integer, got {value!r}")
    if kind is float and (isinstance(value, bool) or not isinstance(value, (int, float))):
        raise ParseError(f"{key} must be a number, got {value!r}")
    return value


CLUSTER_KEYS = {"cores", "clock_ghz", "flops_per_cycle", "ram_gib", "ram_gb", "ranks_per_node"}


def cluster_spec_from_dict(doc: dict[str, Any]) -> ClusterNodeSpec:
    _reject_unknown(doc, CLUSTER_KEYS, "cluster spec")
    if ("ram_gib" in doc) == ("ram_gb" in doc):
        raise ParseError("cluster spec needs exactly one of ram_gib or ram_gb")
    ram_key, unit = ("ram_gib", GIB) if "ram_gib" in doc else ("ram_gb", GB)
    ram = _require(doc, ram_key, float, "cluster spec")
    ranks = doc.get("ranks_per_node")
    if ranks is not None:
        ranks = _require(doc, "ranks_per_node", int, "cluster spec")
    try:
        return ClusterNodeSpec(
            cores=_require(doc, "cores", int, "cluster spec"),
            clock_hz=float(_require(doc, "clock_ghz", float, "cluster spec")) * 1e9,
            flops_per_cycle=_require(doc, "flops_per_cycle", int, "cluster spec"),
            ram_bytes=math.floor(Fraction(ram) * unit),
            ranks_per_node=ranks,
        )
    except DomainError as exc:
        raise ParseError(f"invalid cluster spec: {exc}") from None


def read_cluster_spec(path: PathLike) -> ClusterNodeSpec:
    return cluster_spec_from_dict(_load_toml(path))


SIM_KEYS = {
    "serial_fraction", "comm_idle_fraction", "cores_per_node", "baseline_time_hours",
    "node_counts", "jitter_fraction", "seed", "censor_cutoff_hours", "pathological_nodes",
}


def sim_config_from_dict(doc: dict[str, Any]) -> SimulationConfig:
    _reject_unknown(doc, SIM_KEYS, "simulation config")
    nodes = doc.get("node_counts")
    if not isinstance(nodes, list) or not all(isinstance(n, int) and not isinstance(n, bool) for n in nodes):
        raise ParseError("node_counts must be a list of integers")
    patho_doc = doc.get("pathological_nodes", {})
    if not isinstance(patho_doc, dict):
        raise ParseError("pathological_nodes must be a table of node count = multiplier")
    try:
        patho = {int(k): float(v) for k, v in patho_doc.items()}
    except (TypeError, ValueError):
        raise ParseError("pathological_nodes keys must be integers and values numbers") from None
    cutoff = doc.get("censor_cutoff_hours", 100.0)
    try:
        params = ScalingParams(
            serial_fraction=parse_fraction(_require(doc, "serial_fraction", object, "simulation config")),
            comm_idle_fraction=parse_fraction(doc.get("comm_idle_fraction", 0.0)),
            cores_per_node=_require(doc, "cores_per_node", int, "simulation config"),
            baseline_time=float(_require(doc, "baseline_time_hours", float, "simulation config")),
        )
        return SimulationConfig(
            params=params,
            node_counts=nodes,
            jitter_fraction=parse_fraction(doc.get("jitter_fraction", 0.10)),
            pathological_nodes=patho,
            seed=int(doc.get("seed", 0)),
            censor_cutoff=None if cutoff is False else float(cutoff),
        )
    except DomainError as exc:
        raise ParseError(f"invalid simulation config: {exc}") from None


def read_sim_config(path: PathLike) -> SimulationConfig:
    return sim_config_from_dict(_load_toml(path))


def parse_param_set(text: str) -> tuple[str | None, ScalingParams]:
    """Parse 'S=1%,C=0.244%,Nc=32,T1=89.3,label=base' into a parameter set."""
    fields: dict[str, str] = {}
    for part in text.split(","):
        if not part.strip():
            continue
        key, sep, value = part.partition("=")
        if not sep:
            raise ParseError(f"expected key=value in {part!r}")
        fields[key.strip()] = value.strip()
    _reject_unknown(fields, {"S", "C", "Nc", "T1", "label"}, "parameter set")
    if "S" not in fields:
        raise ParseError(f"parameter set {text!r} needs S")
    try:
        nc = int(fields.get("Nc", "1"))
        t1 = float(fields["T1"]) if "T1" in fields else None
    except ValueError:
        raise ParseError(f"malformed parameter set {text!r}") from None
    try:
        params = ScalingParams(parse_fraction(fields["S"]), parse_fraction(fields.get("C", "0")), nc, t1)
    except DomainError as exc:
        raise ParseError(f"invalid parameter set {text!r}: {exc}") from None
    return fields.get("label"), params


def parse_n_values(text: str) -> list[int]:
    """'1:1024' (every integer), '1:1024:x2' (geometric) or '1,24,96'."""
    text = text.strip()
    try:
        if ":" in text:
            parts = text.split(":")
            if len(parts) not in (2, 3):
                raise ValueError
            start, stop = int(parts[0]), int(parts[1])
            step = parts[2] if len(parts) == 3 else "1"
            if step.startswith("x"):
                ratio = int(step[1:])
                if ratio < 2 or start < 1:
                    raise ValueError
                values, n = [], start
                while n <= stop:
                    values.append(n)
                    n *= ratio
            else:
                if int(step) < 1:
                    raise ValueError
                values = list(range(start, stop + 1, int(step)))
        else:
            values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ParseError(f"cannot parse N values {text!r}") from None
    if not values:
        raise ParseError(f"N values {text!r} are empty")
    if any(v < 1 for v in values):
        raise ParseError(f"N values must be >= 1 in {text!r}")
    return values


# -- SVG ---------------------------------------------------------------------

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b")


def _ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / count
    mag = 10 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 5, 10) if m * mag >= raw)
    first = math.ceil(lo / step) * step
    ticks = []
    t = first
    while t <= hi + step * 1e-9:
        ticks.append(round(t, 12))
        t += step
    return ticks


def _fmt_tick(v: float) -> str:
    return f"{v:g}"


def render_svg(
    series: Sequence[tuple[str, Sequence[float], Sequence[float]]],
    title: str = "",
    x_label: str = "N",
    y_label: str = "speedup",
    log_x: bool = False,
    width: int = 720,
    height: int = 450,
) -> str:
    """Self-contained SVG line chart, one polyline per (label, xs, ys) series."""
    if not series or any(len(xs) == 0 for _, xs, _ in series):
        raise DomainError("render_svg needs at least one non-empty series")
    left, right, top, bottom = 70, 160, 40, 55
    pw, ph = width - left - right, height - top - bottom

    def tx(x):
        return math.log2(x) if log_x else x

    xs_all = [tx(x) for _, xs, _ in series for x in xs]
    ys_all = [y for _, _, ys in series for y in ys]
    x0, x1 = min(xs_all), max(xs_all)
    y0, y1 = 0.0, max(ys_all) * 1.05
    if x1 == x0:
        x1 = x0 + 1
    if y1 <= y0:
        y1 = y0 + 1

    def px(x):
        return left + (tx(x) - x0) / (x1 - x0) * pw

    def py(y):
        return top + ph - (y - y0) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
    ]
    if title:
        out.append(f'<text x="{left + pw / 2:.1f}" y="22" text-anchor="middle" font-size="15">{_esc(title)}</text>')
    # axes
    out.append(f'<line x1="{left}" y1="{top + ph}" x2="{left + pw}" y2="{top + ph}" stroke="black"/>')
    out.append(f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + ph}" stroke="black"/>')
    if log_x:
        xticks = [2.0**k for k in range(math.ceil(x0), math.floor(x1) + 1)]
    else:
        xticks = _ticks(x0, x1)
    for t in xticks:
        x = px(t)
        out.append(f'<line x1="{x:.2f}" y1="{top + ph}" x2="{x:.2f}" y2="{top + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{x:.2f}" y="{top + ph + 18}" text-anchor="middle">{_fmt_tick(t)}</text>')
    for t in _ticks(y0, y1):
        y = py(t)
        out.append(f'<line x1="{left - 5}" y1="{y:.2f}" x2="{left + pw}" y2="{y:.2f}" stroke="#dddddd"/>')
        out.append(f'<text x="{left - 8}" y="{y + 4:.2f}" text-anchor="end">{_fmt_tick(t)}</text>')
    out.append(f'<text x="{left + pw / 2:.1f}" y="{height - 12}" text-anchor="middle">{_esc(x_label)}</text>')
    out.append(
        f'<text x="18" y="{top + ph / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 18 {top + ph / 2:.1f})">{_esc(y_label)}</text>'
    )
    for i, (label, xs, ys) in enumerate(series):
        color = _PALETTE[i % len(_PALETTE)]
        pts = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(xs, ys))
        out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="2"/>')
        ly = top + 10 + 18 * i
        out.append(f'<line x1="{left + pw + 12}" y1="{ly}" x2="{left + pw + 32}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{left + pw + 38}" y="{ly + 4}">{_esc(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _esc(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
