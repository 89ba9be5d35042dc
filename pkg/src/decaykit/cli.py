"""Command line front end: ``decaykit <command> --config scenario.toml``.

Every command writes CSV (17 significant digits, LF endings) or JSON
(sorted keys) to ``--out`` or standard output.  Output depends only on the
inputs, so repeated runs are byte-identical.
"""

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import autocorr, moments, regions, survival
from .dos import (
    ConstantFormFactor,
    ExponentialFormFactor,
    Pole,
    PoleSet,
    build_dos,
    constant_ff_pole_set,
    dimensionless_pole_set,
    eval_dos,
    narrow_resonance,
    physical_to_dimensionless,
)
from .errors import ConfigError, DecayKitError

COMMANDS = ("dos", "survival", "autocorr", "moments", "regions", "table1", "be8")
MAX_POINTS = 10**7
SMALL_B_S = 1e-3
HBAR_KEV_S = 6.582119569e-19
BE8 = {"re_keV": 92.0, "im_eV": 2.8, "nu": 0.5, "b_s": 1.0}


@dataclass(frozen=True)
class Grid:
    n_max: float = 10.0
    tau_max: float = None
    points: int = 200
    spacing: str = "linear"
    start: float = None


@dataclass(frozen=True)
class Scenario:
    nu: float = 0.5
    b_s: float = 1.0
    x_d: float = None
    poles: tuple = ()
    form_factor: str = "exponential"
    weights: tuple = None
    grid: Grid = Grid()
    route: str = "closed_form"
    e_max: float = 3.0
    moment_order: int = 4


def warn(message):
    print(f"decaykit: warning: {message}", file=sys.stderr)


# configuration

def load_config(path):
    """Read a TOML or JSON scenario file into a plain dict."""
    p = Path(path)
    try:
        text = p.read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    try:
        if p.suffix.lower() == ".json":
            return json.loads(text)
        return tomllib.loads(text.decode("utf-8"))
    except (ValueError, UnicodeDecodeError) as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc


def _number(table, key, default=None, kind=float):
    value = table.get(key, default)
    if value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{key} must be a number, got {value!r}")
    value = kind(value)
    if kind is float and not math.isfinite(value):
        raise ConfigError(f"{key} must be finite")
    return value


def parse_scenario(data):
    """Validate a config dict and return a :class:`Scenario`."""
    if not isinstance(data, dict):
        raise ConfigError("the configuration must be a table")
    res = data.get("resonance", {})
    if not isinstance(res, dict):
        raise ConfigError("[resonance] must be a table")
    has_x = "x_d" in res
    has_poles = "poles" in res
    if has_x == has_poles:
        raise ConfigError("give exactly one of resonance.x_d (dimensionless) or resonance.poles (physical)")
    kw = {"nu": _number(res, "nu", 0.5), "b_s": _number(res, "b_s", 1.0)}
    if has_x:
        kw["x_d"] = _number(res, "x_d")
        if not kw["x_d"] > 0:
            raise ConfigError("x_d must be positive")
    else:
        poles = res["poles"]
        if not isinstance(poles, list) or not poles:
            raise ConfigError("resonance.poles must be a non-empty list")
        parsed = []
        for p in poles:
            if not isinstance(p, dict) or "re_keV" not in p or "im_eV" not in p:
                raise ConfigError("each pole needs re_keV and im_eV")
            re, im = _number(p, "re_keV"), _number(p, "im_eV")
            if not (re > 0 and im > 0):
                raise ConfigError("pole energies must be positive")
            parsed.append((re, im))
        kw["poles"] = tuple(parsed)
    ff = res.get("form_factor", "exponential")
    if ff not in ("exponential", "constant"):
        raise ConfigError(f"form_factor must be 'exponential' or 'constant', got {ff!r}")
    if ff == "constant" and has_x:
        raise ConfigError("a constant form factor needs a physical pole list with at least two poles")
    kw["form_factor"] = ff
    if "weights" in res:
        kw["weights"] = tuple(float(w) for w in res["weights"])

    g = data.get("grid", {})
    if not isinstance(g, dict):
        raise ConfigError("[grid] must be a table")
    if "n_max" in g and "tau_max" in g:
        raise ConfigError("give at most one of grid.n_max and grid.tau_max")
    points = _number(g, "points", 200, int)
    if not 2 <= points <= MAX_POINTS:
        raise ConfigError(f"grid.points must lie in [2, {MAX_POINTS}]")
    spacing = g.get("spacing", "linear")
    if spacing not in ("linear", "log"):
        raise ConfigError("grid.spacing must be 'linear' or 'log'")
    grid = Grid(
        n_max=_number(g, "n_max", 10.0) if "tau_max" not in g else None,
        tau_max=_number(g, "tau_max"),
        points=points,
        spacing=spacing,
        start=_number(g, "start"),
    )
    top = grid.tau_max if grid.tau_max is not None else grid.n_max
    if not top > 0:
        raise ConfigError("the grid end must be positive")
    kw["grid"] = grid

    opts = data.get("options", {})
    route = opts.get("route", "closed_form")
    if route not in survival.ROUTES:
        raise ConfigError(f"options.route must be one of {survival.ROUTES}")
    kw["route"] = route
    kw["e_max"] = _number(opts, "e_max", 3.0)
    kw["moment_order"] = _number(opts, "moment_order", 4, int)
    if not 0 <= kw["moment_order"] <= moments.MAX_ORDER:
        raise ConfigError(f"options.moment_order must lie in [0, {moments.MAX_ORDER}]")
    return Scenario(**kw)


def time_grid(grid):
    """(kind, values) with kind 'n' or 'tau'."""
    kind, top = ("tau", grid.tau_max) if grid.tau_max is not None else ("n", grid.n_max)
    if grid.spacing == "linear":
        start = 0.0 if grid.start is None else grid.start
        values = np.linspace(start, top, grid.points)
    else:
        start = top * 1e-4 if grid.start is None else grid.start
        if not 0 < start < top:
            raise ConfigError("log spacing needs 0 < grid.start < grid end")
        values = np.geomspace(start, top, grid.points)
    return kind, values


def build_from_scenario(sc):
    """Density of states in units of the dominant pole's Re z."""
    if sc.b_s < SMALL_B_S:
        warn(f"b_s = {sc.b_s:g} is below {SMALL_B_S:g}: P(t) varies strongly near t = 0; only the closed form is trusted there")
    if sc.x_d is not None:
        return narrow_resonance(sc.x_d, sc.nu, sc.b_s)
    ps, _ = dimensionless_pole_set(PoleSet(tuple(Pole.from_physical(re, im) for re, im in sc.poles)))
    if sc.form_factor == "constant":
        return build_dos(constant_ff_pole_set(ps.poles, sc.nu, sc.weights), sc.nu, ConstantFormFactor())
    return build_dos(ps, sc.nu, ExponentialFormFactor(sc.b_s))


# output

def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, str):
        return v
    return format(float(v), ".17g")


def write_csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else None
    if isinstance(obj, complex):
        return [_clean(obj.real), _clean(obj.imag)]
    return obj


def write_json(obj):
    return json.dumps(_clean(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def _table(header, rows, fmt):
    if fmt == "csv":
        return write_csv(header, rows)
    return write_json([dict(zip(header, r)) for r in rows])


def _pairs(d, fmt):
    """Scalar summaries: JSON object, or a two-column quantity,value CSV."""
    if fmt == "json":
        return write_json(d)
    rows = []
    for k in sorted(d):
        v = d[k]
        if isinstance(v, (list, tuple)):
            rows.extend((f"{k}[{i}]", x) for i, x in enumerate(_flatten(v)))
        elif v is None:
            rows.append((k, float("nan")))
        else:
            rows.append((k, v))
    return write_csv(["quantity", "value"], rows)


def _flatten(v):
    for x in v:
        if isinstance(x, (list, tuple)):
            yield from _flatten(x)
        else:
            yield x


# commands

def _workers():
    raw = os.environ.get("DECAYKIT_THREADS")
    if not raw:
        return None
    try:
        n = int(raw)
    except ValueError as exc:
        raise ConfigError(f"DECAYKIT_THREADS must be an integer, got {raw!r}") from exc
    if n < 1:
        raise ConfigError("DECAYKIT_THREADS must be at least 1")
    return n


def cmd_dos(sc, fmt):
    dos = build_from_scenario(sc)
    E = np.linspace(0.0, sc.e_max, sc.grid.points)
    rho = eval_dos(dos, E)
    return _table(["E", "rho"], zip(E, rho), fmt)


def cmd_survival(sc, fmt):
    dos = build_from_scenario(sc)
    kind, values = time_grid(sc.grid)
    curve = survival.survival_probability(dos, **{kind: values}, route=sc.route, workers=_workers())
    try:
        rep = regions.region_boundaries(dos)
        I = regions.modulating_I(curve.n, regions.TransitionConstant(rep.C), rep.x_d, rep.nu)
    except DecayKitError as exc:
        warn(f"I(n) unavailable: {type(exc).__name__}: {exc}")
        I = np.full(curve.n.shape, np.nan)
    rows = zip(curve.n, curve.tau, curve.P, curve.P_e, curve.P_ne, curve.P_i, I)
    return _table(["n", "tau", "P", "P_e", "P_ne", "P_i", "I"], rows, fmt)


def cmd_autocorr(sc, fmt):
    dos = build_from_scenario(sc)
    y = autocorr.default_y_grid(dos, sc.grid.points)
    R = autocorr.autocorr_curve(dos, y).R
    p = dos.pole_set.dominant
    lor = autocorr.lorentzian_autocorr(y, p.omega, dos.dominant_residue)
    return _table(["y", "R", "R_lorentzian"], zip(y, R, lor), fmt)


def cmd_moments(sc, fmt):
    dos = build_from_scenario(sc)
    table = moments.moment_table(dos, sc.moment_order)
    p = moments.taylor_p(table, sc.moment_order)
    if fmt == "csv":
        return write_csv(["n", "moment", "p"], [(k, m, pk) for k, (m, pk) in enumerate(zip(table.values, p))])
    d = table.as_dict()
    d["taylor_p"] = p
    return write_json(d)


def cmd_regions(sc, fmt):
    dos = build_from_scenario(sc)
    return _pairs(regions.region_boundaries(dos).as_dict(), fmt)


def cmd_table1(sc, fmt):
    rows = regions.table1(b_s=sc.b_s, nu=sc.nu)
    out = [(r.x_d, r.tau_G, r.tau_cs, r.tau_osc, r.n_G, r.n_cs, r.root_missing) for r in rows]
    for r in rows:
        if r.root_missing:
            warn(f"RootMissing: no small-time intersection at x_d = {r.x_d:g}")
    return _table(["x_d", "tau_G", "tau_cs", "tau_osc", "n_G", "n_cs", "root_missing"], out, fmt)


def cmd_be8(sc, fmt):
    conv = physical_to_dimensionless(BE8["re_keV"], BE8["im_eV"], sc.b_s)
    x = conv["x_s"]
    lifetime_natural = 1.0 / conv["omega_keV"]
    intervals = moments.negative_variance_intervals(x, sc.nu)
    d = {
        "re_keV": BE8["re_keV"],
        "im_eV": BE8["im_eV"],
        "nu": sc.nu,
        "b_s": sc.b_s,
        "x_s": x,
        "b_per_MeV": conv["b_per_MeV"],
        "omega_keV": conv["omega_keV"],
        "lifetime_per_keV": lifetime_natural,
        "lifetime_s": lifetime_natural * HBAR_KEV_S,
        "oscillation_period_lifetimes": 4.0 * math.pi * x,
        "oscillation_period_s": 4.0 * math.pi * x * lifetime_natural * HBAR_KEV_S,
        "negative_variance_b_s": [list(iv) for iv in intervals],
    }
    return _pairs(d, fmt)


HANDLERS = {
    "dos": cmd_dos,
    "survival": cmd_survival,
    "autocorr": cmd_autocorr,
    "moments": cmd_moments,
    "regions": cmd_regions,
    "table1": cmd_table1,
    "be8": cmd_be8,
}

# defaults for commands that run without a config file
PRESETS = {
    "table1": {"nu": 0.5, "b_s": 2.0},
    "be8": {"nu": BE8["nu"], "b_s": BE8["b_s"]},
}


def build_parser():
    ap = argparse.ArgumentParser(prog="decaykit", description="Survival probability of unstable states from resonance poles.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", help="scenario file (TOML, or JSON with a .json suffix)")
    ap.add_argument("--out", help="output file (default: standard output)")
    ap.add_argument("--format", choices=("csv", "json"), default="csv")
    ap.add_argument("--b-s", type=float, dest="b_s", help="override b_s (b times Re z_d)")
    ap.add_argument("--nu", type=float, help="override the threshold exponent")
    return ap


def _scenario_for(args):
    """Preset commands take only --b-s/--nu; the others need a scenario file."""
    if args.command in PRESETS:
        sc = Scenario(**PRESETS[args.command])
    elif args.config:
        sc = parse_scenario(load_config(args.config))
    else:
        raise ConfigError(f"{args.command} needs --config")
    if args.b_s is not None:
        sc = replace(sc, b_s=args.b_s)
    if args.nu is not None:
        sc = replace(sc, nu=args.nu)
    return sc


def run(argv=None):
    args = build_parser().parse_args(argv)
    sc = _scenario_for(args)
    text = HANDLERS[args.command](sc, args.format)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def main(argv=None):
    try:
        return run(argv)
    except ConfigError as exc:
        print(f"decaykit: ConfigError: {exc}", file=sys.stderr)
        return 2
    except (DecayKitError, ValueError) as exc:
        print(f"decaykit: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
