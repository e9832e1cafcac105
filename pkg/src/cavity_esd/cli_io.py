"""Flat key = value scenario configs, CSV output and figure reproduction.

A config file holds one ``key = value`` pair per line; ``#`` starts a
comment. Numbers may be written as decimals or plain fractions such as
``1/6``. Example::

    scenario = fock
    omega = 5
    omega0 = 1
    omega_c = 0
    lambda = 0
    g = 1
    n = 0
    t_end = 10
    steps = 1000
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import logging
import math
import sys
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Any, Callable, Optional

import numpy as np

from . import analysis as an
from . import atom_field as af
from . import two_atom as ta

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERIC = 2

SCENARIOS = ("fock", "thermal", "two_atom", "sweep", "esd")


@dataclass(frozen=True)
class ConfigIssue:
    kind: str  # MissingKey, UnknownKey or BadValue
    key: Optional[str]
    line: Optional[int]
    message: str

    def __str__(self):
        where = f"line {self.line}: " if self.line is not None else ""
        return f"{where}{self.kind}({self.key!r}): {self.message}"


class ConfigError(ValueError):
    """All problems found while parsing a config."""

    def __init__(self, issues: list[ConfigIssue]):
        self.issues = list(issues)
        super().__init__("\n".join(str(i) for i in self.issues))

    def kinds(self) -> set[str]:
        return {i.kind for i in self.issues}


class UnknownFigureError(ValueError):
    pass


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    omega: Optional[float] = None
    omega0: Optional[float] = None
    omega_c: Optional[float] = None
    lam: Optional[float] = None
    g: Optional[float] = None
    branch: Optional[str] = None
    n: Optional[int] = None
    mean_photons: Optional[float] = None
    cutoff: Optional[int] = None
    tail_tol: Optional[float] = None
    kind: Optional[str] = None
    r: Optional[float] = None
    mu_sq: Optional[float] = None
    nu_phase: Optional[float] = None
    t_start: Optional[float] = None
    t_end: Optional[float] = None
    steps: Optional[int] = None
    t_eval: Optional[float] = None
    lambda_min: Optional[float] = None
    lambda_max: Optional[float] = None
    lambda_steps: Optional[int] = None
    omega_c_min: Optional[float] = None
    omega_c_max: Optional[float] = None
    omega_c_steps: Optional[int] = None
    refine_tol: Optional[float] = None
    output: Optional[str] = None


def _number(text: str) -> float:
    try:
        val = float(text)
    except ValueError:
        val = float(Fraction(text))
    if not math.isfinite(val):
        raise ValueError("not a finite number")
    return val


def _integer(text: str) -> int:
    val = _number(text)
    if val != int(val):
        raise ValueError("not an integer")
    return int(val)


def _choice(*options: str) -> Callable[[str], str]:
    def parse(text: str) -> str:
        if text not in options:
            raise ValueError(f"expected one of {', '.join(options)}")
        return text

    return parse


def _check(pred: Callable[[Any], bool], what: str):
    def check(val):
        if not pred(val):
            raise ValueError(what)

    return check


_NONNEG = _check(lambda v: v >= 0, "must be >= 0")
_POS = _check(lambda v: v > 0, "must be > 0")
_UNIT = _check(lambda v: 0 <= v <= 1, "must lie in [0, 1]")
_OPEN_UNIT = _check(lambda v: 0 < v < 1, "must lie in (0, 1)")
_STEPS = _check(lambda v: v >= 2, "must be >= 2")
_GRID_N = _check(lambda v: v >= 1, "must be >= 1")


@dataclass(frozen=True)
class _Key:
    field: str
    parse: Callable[[str], Any]
    check: Optional[Callable[[Any], None]] = None


KEYS: dict[str, _Key] = {
    "scenario": _Key("scenario", _choice(*SCENARIOS)),
    "omega": _Key("omega", _number, _NONNEG),
    "omega0": _Key("omega0", _number, _NONNEG),
    "omega_c": _Key("omega_c", _number, _NONNEG),
    "lambda": _Key("lam", _number, _NONNEG),
    "g": _Key("g", _number, _POS),
    "branch": _Key("branch", _choice("halfplane", "principal")),
    "n": _Key("n", _integer, _NONNEG),
    "mean_photons": _Key("mean_photons", _number, _NONNEG),
    "cutoff": _Key("cutoff", _integer, _NONNEG),
    "tail_tol": _Key("tail_tol", _number, _OPEN_UNIT),
    "kind": _Key("kind", _choice("phi", "psi", "both")),
    "r": _Key("r", _number, _UNIT),
    "mu_sq": _Key("mu_sq", _number, _UNIT),
    "nu_phase": _Key("nu_phase", _number),
    "t_start": _Key("t_start", _number, _NONNEG),
    "t_end": _Key("t_end", _number, _POS),
    "steps": _Key("steps", _integer, _STEPS),
    "t_eval": _Key("t_eval", _number, _NONNEG),
    "lambda_min": _Key("lambda_min", _number, _NONNEG),
    "lambda_max": _Key("lambda_max", _number, _NONNEG),
    "lambda_steps": _Key("lambda_steps", _integer, _GRID_N),
    "omega_c_min": _Key("omega_c_min", _number, _NONNEG),
    "omega_c_max": _Key("omega_c_max", _number, _NONNEG),
    "omega_c_steps": _Key("omega_c_steps", _integer, _GRID_N),
    "refine_tol": _Key("refine_tol", _number, _POS),
    "output": _Key("output", str),
}
_FIELD_TO_KEY = {k.field: name for name, k in KEYS.items()}

_COMMON_OPT = {"branch", "output"}
_ATOM = {"omega", "omega0", "g"}
_DRIVE = {"omega_c", "lambda"}
_TIME_REQ = {"t_end", "steps"}
_TIME_OPT = {"t_start"}
_EWL_REQ = {"r", "mu_sq"}
_EWL_OPT = {"nu_phase", "kind"}

# scenario -> (required keys, optional keys)
LAYOUT: dict[str, tuple[set[str], set[str]]] = {
    "fock": (_ATOM | _DRIVE | _TIME_REQ | {"n"}, _TIME_OPT),
    "thermal": (_ATOM | _DRIVE | _TIME_REQ | {"mean_photons"}, _TIME_OPT | {"cutoff", "tail_tol"}),
    "two_atom": (_ATOM | _DRIVE | _TIME_REQ | _EWL_REQ, _TIME_OPT | _EWL_OPT),
    "sweep": (
        _ATOM | _EWL_REQ | {"t_eval", "lambda_min", "lambda_max", "lambda_steps",
                            "omega_c_min", "omega_c_max", "omega_c_steps"},
        _EWL_OPT,
    ),
    "esd": (_ATOM | _DRIVE | _TIME_REQ | _EWL_REQ, _TIME_OPT | _EWL_OPT | {"refine_tol"}),
}

DEFAULTS = {
    "branch": "halfplane",
    "t_start": 0.0,
    "cutoff": 0,
    "tail_tol": af.DEFAULT_TAIL_TOL,
    "nu_phase": 0.0,
    "refine_tol": an.DEFAULT_REFINE_TOL,
}


def parse_config(text: str) -> ScenarioConfig:
    """Parse and validate a config, collecting every problem before raising."""
    issues: list[ConfigIssue] = []
    values: dict[str, Any] = {}
    lines: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            issues.append(ConfigIssue("BadValue", None, lineno, f"expected 'key = value', got {line!r}"))
            continue
        key, val = (part.strip() for part in line.split("=", 1))
        if key not in KEYS:
            issues.append(ConfigIssue("UnknownKey", key, lineno, "unknown key"))
            continue
        if key in lines:
            issues.append(ConfigIssue("BadValue", key, lineno, f"duplicate key (first on line {lines[key]})"))
            continue
        lines[key] = lineno
        spec = KEYS[key]
        try:
            parsed = spec.parse(val)
            if spec.check is not None:
                spec.check(parsed)
        except (ValueError, ZeroDivisionError) as exc:
            issues.append(ConfigIssue("BadValue", key, lineno, f"{val!r}: {exc}"))
            continue
        values[key] = parsed

    scenario = values.get("scenario")
    if "scenario" not in lines:
        issues.append(ConfigIssue("MissingKey", "scenario", None, "scenario kind is required"))
    if scenario is not None:
        required, optional = LAYOUT[scenario]
        allowed = required | optional | _COMMON_OPT | {"scenario"}
        for key in sorted(required - set(lines)):
            issues.append(ConfigIssue("MissingKey", key, None, f"required for scenario {scenario}"))
        for key in sorted(set(lines) - allowed, key=lines.get):
            issues.append(ConfigIssue("UnknownKey", key, lines[key], f"not used by scenario {scenario}"))
            values.pop(key, None)
        _cross_checks(scenario, values, lines, issues)

    if issues:
        issues.sort(key=lambda i: (i.line is None, i.line or 0))
        raise ConfigError(issues)
    return ScenarioConfig(**{KEYS[k].field: v for k, v in values.items()})


def _cross_checks(scenario, values, lines, issues):
    t0 = values.get("t_start", 0.0)
    if "t_end" in values and values["t_end"] <= t0:
        issues.append(ConfigIssue("BadValue", "t_end", lines["t_end"], "must exceed t_start"))
    for lo, hi in (("lambda_min", "lambda_max"), ("omega_c_min", "omega_c_max")):
        if lo in values and hi in values and values[hi] < values[lo]:
            issues.append(ConfigIssue("BadValue", hi, lines[hi], f"must be >= {lo}"))
    if scenario == "esd" and values.get("kind") == "both":
        issues.append(ConfigIssue("BadValue", "kind", lines["kind"], "esd needs a single kind (phi or psi)"))


def _fmt(val: Any) -> str:
    if isinstance(val, float):
        return repr(val)
    return str(val)


def render_config(cfg: ScenarioConfig) -> str:
    """Inverse of :func:`parse_config` for the keys that are set."""
    out = [f"scenario = {cfg.scenario}"]
    for f in dataclasses.fields(cfg):
        if f.name == "scenario":
            continue
        val = getattr(cfg, f.name)
        if val is not None:
            out.append(f"{_FIELD_TO_KEY[f.name]} = {_fmt(val)}")
    return "\n".join(out) + "\n"


def _get(cfg: ScenarioConfig, field: str):
    val = getattr(cfg, field)
    if val is None:
        return DEFAULTS.get(_FIELD_TO_KEY[field])
    return val


def _params(cfg: ScenarioConfig, lam=None, omega_c=None) -> af.DrivenJCParams:
    return af.DrivenJCParams(
        omega=cfg.omega,
        omega0=cfg.omega0,
        omega_c=cfg.omega_c if omega_c is None else omega_c,
        lam=cfg.lam if lam is None else lam,
        g=cfg.g,
        branch=af.Branch(_get(cfg, "branch")),
    )


def _grid(cfg: ScenarioConfig) -> an.TimeGrid:
    return an.TimeGrid(_get(cfg, "t_start"), cfg.t_end, cfg.steps)


def _kinds(cfg: ScenarioConfig) -> list[str]:
    kind = cfg.kind or "both"
    return ["phi", "psi"] if kind == "both" else [kind]


def _ewl(cfg: ScenarioConfig, kind: str) -> ta.EWLSpec:
    return ta.EWLSpec.from_weight(kind, cfg.r, cfg.mu_sq, _get(cfg, "nu_phase"))


def scenario_table(cfg: ScenarioConfig) -> tuple[list[str], list[list[float]]]:
    """Header and numeric rows for a validated config."""
    kind = cfg.scenario
    if kind == "fock":
        grid = _grid(cfg)
        tr = an.negativity_trace(an.FockScenario(_params(cfg), cfg.n), grid)
        return ["t", "N", "E"], _columns(grid.times(), tr.N, tr.E)
    if kind == "thermal":
        grid = _grid(cfg)
        field = af.ThermalFieldSpec(cfg.mean_photons, _get(cfg, "cutoff"), _get(cfg, "tail_tol"))
        tr = an.negativity_trace(an.ThermalScenario(_params(cfg), field), grid)
        return ["t", "N", "E"], _columns(grid.times(), tr.N, tr.E)
    if kind == "two_atom":
        grid = _grid(cfg)
        kinds = _kinds(cfg)
        cols, header = [grid.times()], ["t"]
        for k in kinds:
            tr = an.negativity_trace(an.TwoAtomScenario(_params(cfg), _ewl(cfg, k)), grid)
            cols += [tr.N, tr.E]
            header += ["N", "E"] if len(kinds) == 1 else [f"N_{k}", f"E_{k}"]
        return header, _columns(*cols)
    if kind == "sweep":
        lams = np.linspace(cfg.lambda_min, cfg.lambda_max, cfg.lambda_steps)
        wcs = np.linspace(cfg.omega_c_min, cfg.omega_c_max, cfg.omega_c_steps)
        base = an.TwoAtomScenario(_params(cfg, lam=0.0, omega_c=0.0), _ewl(cfg, "phi"))
        surf = an.sweep_drive_grid(base, lams, wcs, cfg.t_eval)
        kinds = _kinds(cfg)
        header = ["lambda", "omega_c"] + [f"E_{k}" for k in kinds]
        picks = [("phi", "psi").index(k) for k in kinds]
        rows = [
            [float(lam), float(wc)] + [float(surf[i, j, p]) for p in picks]
            for i, lam in enumerate(lams)
            for j, wc in enumerate(wcs)
        ]
        return header, rows
    if kind == "esd":
        grid = _grid(cfg)
        sc = an.TwoAtomScenario(_params(cfg), _ewl(cfg, _kinds(cfg)[0]))
        events = an.esd_events(an.negativity_trace(sc, grid), _get(cfg, "refine_tol"))
        return ["death_time", "revival_time"], [[ev.death_time, ev.revival_time] for ev in events]
    raise ValueError(f"unknown scenario {kind!r}")


def _columns(*cols) -> list[list[float]]:
    return [list(row) for row in zip(*(np.asarray(c, dtype=float).tolist() for c in cols))]


def format_number(x: float) -> str:
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.12g}"


def write_csv(header: list[str], rows: list[list[float]], stream) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_number(float(x)) for x in row])


def render_csv(cfg: ScenarioConfig) -> str:
    header, rows = scenario_table(cfg)
    buf = io.StringIO()
    write_csv(header, rows, buf)
    return buf.getvalue()


def run_scenario(cfg: ScenarioConfig, output: Optional[str] = None) -> int:
    """Evaluate ``cfg`` and write its CSV; returns a process exit status.

    The target is ``output`` if given, else the config's ``output`` key,
    else standard output.
    """
    try:
        text = render_csv(cfg)
    except (ArithmeticError, ValueError) as exc:
        print(f"error: numeric failure in {cfg.scenario} scenario: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    target = output or cfg.output
    if target is None:
        sys.stdout.write(text)
    else:
        path = Path(target)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    return EXIT_OK


FIGURES = {
    1: ("upper_dotted", "upper_solid", "lower_dotted", "lower_solid"),
    2: ("upper_dotted", "upper_solid", "lower_dotted", "lower_solid"),
    3: ("upper_phi", "lower_psi"),
    4: ("upper_dotted", "upper_dashed", "upper_solid", "lower_dotted", "lower_dashed", "lower_solid"),
    5: ("upper_dotted", "upper_dashed", "upper_solid", "lower_dotted", "lower_dashed", "lower_solid"),
}


def figure_configs(fig_id: int) -> dict[str, ScenarioConfig]:
    """Baked-in configs for each curve of a figure, keyed by file stem."""
    if fig_id not in FIGURES:
        raise UnknownFigureError(f"no figure {fig_id!r}; choose from {sorted(FIGURES)}")
    root = resources.files("cavity_esd") / "figures"
    out = {}
    for curve in FIGURES[fig_id]:
        stem = f"fig{fig_id}_{curve}"
        out[stem] = parse_config((root / f"{stem}.cfg").read_text())
    return out


def apply_overrides(cfg: ScenarioConfig, **overrides) -> ScenarioConfig:
    """Replace fields that are set in ``overrides`` and used by the scenario."""
    required, optional = LAYOUT[cfg.scenario]
    used = {KEYS[k].field for k in required | optional | _COMMON_OPT}
    changes = {k: v for k, v in overrides.items() if v is not None and k in used}
    return dataclasses.replace(cfg, **changes)


def reproduce_figure(fig_id: int, out_dir, **overrides) -> list[Path]:
    """Write one CSV per curve of figure ``fig_id`` into ``out_dir``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for stem, cfg in figure_configs(fig_id).items():
        cfg = apply_overrides(cfg, **overrides)
        path = out_dir / f"{stem}.csv"
        path.write_text(render_csv(cfg))
        written.append(path)
    return written


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def _add_shared(p: argparse.ArgumentParser, suppress: bool) -> None:
    default = argparse.SUPPRESS if suppress else None
    p.add_argument("--branch", choices=("halfplane", "principal"), default=default,
                   help="mixing-angle branch")
    p.add_argument("--tail-tol", type=float, default=default, help="thermal tail tolerance")
    p.add_argument("--refine-tol", type=float, default=default, help="ESD edge bisection tolerance")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cavity-esd", description="Entanglement dynamics in driven cavity QED.")
    _add_shared(parser, suppress=False)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    run = sub.add_parser("run", help="evaluate a scenario config")
    run.add_argument("--config", required=True, type=Path)
    run.add_argument("--out", default=None, help="output CSV (default: config 'output' or stdout)")
    _add_shared(run, suppress=True)
    fig = sub.add_parser("figure", help="write the CSV data behind a figure")
    fig.add_argument("figure_id", type=int)
    fig.add_argument("--out", default=".", type=Path, help="output directory")
    _add_shared(fig, suppress=True)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr)
    overrides = {"branch": args.branch, "tail_tol": args.tail_tol, "refine_tol": args.refine_tol}
    for name in ("tail_tol", "refine_tol"):
        val = overrides[name]
        if val is not None and not (0 < val < 1):
            print(f"error: --{name.replace('_', '-')} must lie in (0, 1)", file=sys.stderr)
            return EXIT_CONFIG

    if args.command == "run":
        try:
            cfg = parse_config(args.config.read_text())
        except OSError as exc:
            print(f"error: cannot read config: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        except ConfigError as exc:
            print(f"error: invalid config {args.config}:\n{exc}", file=sys.stderr)
            return EXIT_CONFIG
        return run_scenario(apply_overrides(cfg, **overrides), args.out)

    try:
        paths = reproduce_figure(args.figure_id, args.out, **overrides)
    except UnknownFigureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ArithmeticError, ValueError) as exc:
        print(f"error: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    for p in paths:
        logger.info("wrote %s", p)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
