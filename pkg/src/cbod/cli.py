"""Command-line sweep runner.

Experiments:

  static-fidelity   ground-state overlap of the adiabatic factorization vs
                    the exact pair, swept over the mass ratio
  ramp-fidelity     driven-evolution fidelity vs mass ratio, one curve per
                    ramp strength
  time-sweep        driven-evolution fidelity vs ramp duration
  coulomb-report    hydrogenic connection / CD comparison table
  oracle-check      the full cross-module consistency suite

Each run writes <experiment>.csv, config.resolved.toml, and (for the
sweeps) <experiment>.svg into --out.  Identical resolved configs yield
byte-identical CSVs; floats are written with shortest round-trip repr
and sweep tasks are gathered in deterministic order even under --jobs.

Exit codes: 0 success, 1 config error, 2 physics-validity error,
3 oracle-check failure.
"""

import argparse
import copy
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

from .params import OscillatorParams, RampSchedule, PhysicsValidityError, validate
from .oscillators import ImaginaryFrequencyError, static_fidelity
from .dynamics import (
    ErmakovSingularityError,
    EvolutionDivergedError,
    evolve_cbod,
)
from . import coulomb
from .oracle_suite import run_oracle_suite
from . import plots


class ConfigError(ValueError):
    pass


EXPERIMENTS = (
    "static-fidelity",
    "ramp-fidelity",
    "time-sweep",
    "coulomb-report",
    "oracle-check",
)

_RAMPABLE = ("kappa_s", "kappa_f", "k_i")

_BASE_PARAMS = {"m_s": 10.0, "kappa_s": 100.0, "kappa_f": 100.0, "k_i": 50.0}

# None marks a default that depends on which parameter is varied; it is
# filled in during resolution and always appears in config.resolved.toml.
DEFAULTS = {
    "static-fidelity": {
        "vary": "kappa_s",
        "curve_values": None,
        "control_zero_coupling": True,
        "params": dict(_BASE_PARAMS),
        "sweep": {"points": 25, "lo": 1e-3, "hi": 1.0, "scale": "log"},
    },
    "ramp-fidelity": {
        "vary": "kappa_s",
        "k0": None,
        "k1": None,
        "Tf": 1.0,
        "params": dict(_BASE_PARAMS),
        "sweep": {"points": 25, "lo": 1e-3, "hi": 1.0, "scale": "log"},
        "solver": {"method": "riccati", "steps": 0},
    },
    "time-sweep": {
        "vary": "kappa_s",
        "k0": None,
        "k1": None,
        "mass_ratio": 0.1,
        "params": dict(_BASE_PARAMS),
        "sweep": {"points": 20, "lo": 0.05, "hi": 1.0, "scale": "log"},
        "solver": {"method": "riccati", "steps": 0},
    },
    "coulomb-report": {
        "states": [[1, 0], [2, 0], [2, 1], [3, 0], [3, 1], [3, 2]],
        "g": 1.0,
        "gdot": 1.0,
        "m_f": 1.0,
        "quadrature_nodes": 200,
        "profile": {"r_max_bohr": 12.0, "points": 241},
    },
    "oracle-check": {},
}

# curve-family defaults from the figure protocols: spring ramps use a
# k0 = 50 offset, the coupling ramp starts from a weak k0 = 1
_SPRING_K1 = [10.0, 25.0, 40.0]
_COUPLING_K1 = [10.0, 20.0, 30.0]
_STATIC_SPRING_CURVES = [50.0, 100.0, 150.0]
_STATIC_COUPLING_CURVES = [10.0, 50.0, 90.0]


# ---------------------------------------------------------------------------
# config plumbing


def _deep_merge(base, override, path=""):
    out = copy.deepcopy(base)
    for key, val in override.items():
        where = f"{path}.{key}" if path else key
        if key not in base:
            raise ConfigError(f"unknown config key {where!r}")
        if isinstance(base[key], dict):
            if not isinstance(val, dict):
                raise ConfigError(f"{where!r} must be a table")
            out[key] = _deep_merge(base[key], val, where)
        else:
            out[key] = copy.deepcopy(val)
    return out


def _parse_set(item):
    key, sep, raw = item.partition("=")
    if not sep or not key:
        raise ConfigError(f"--set needs KEY=VALUE, got {item!r}")
    try:
        value = tomllib.loads(f"v = {raw}")["v"]
    except tomllib.TOMLDecodeError:
        value = raw  # bare words are taken as strings
    node = value
    for part in reversed(key.split(".")):
        node = {part: node}
    return node


def resolve_config(experiment, config_path=None, overrides=()):
    """Merge file and --set overrides onto the experiment defaults."""
    if experiment not in DEFAULTS:
        raise ConfigError(f"unknown experiment {experiment!r}")
    cfg = copy.deepcopy(DEFAULTS[experiment])
    cfg_from_file = {}
    if config_path is not None:
        with open(config_path, "rb") as fh:
            cfg_from_file = tomllib.load(fh)
        declared = cfg_from_file.pop("experiment", experiment)
        if declared != experiment:
            raise ConfigError(
                f"config declares experiment {declared!r} but {experiment!r} was requested"
            )
    merged = dict(cfg, experiment=experiment)
    for chunk in (cfg_from_file, *[_parse_set(s) for s in overrides]):
        chunk = dict(chunk)
        chunk.pop("experiment", None)
        merged = dict(_deep_merge({k: v for k, v in merged.items() if k != "experiment"}, chunk),
                      experiment=experiment)
    _fill_vary_defaults(merged)
    _validate_config(merged)
    return merged


def _fill_vary_defaults(cfg):
    vary = cfg.get("vary")
    if vary is not None and vary not in _RAMPABLE:
        raise ConfigError(f"vary must be one of {_RAMPABLE}, got {vary!r}")
    if cfg["experiment"] == "static-fidelity" and cfg["curve_values"] is None:
        cfg["curve_values"] = list(
            _STATIC_COUPLING_CURVES if vary == "k_i" else _STATIC_SPRING_CURVES
        )
    if cfg["experiment"] in ("ramp-fidelity", "time-sweep"):
        if cfg["k0"] is None:
            cfg["k0"] = 1.0 if vary == "k_i" else 50.0
        if cfg["k1"] is None:
            cfg["k1"] = list(_COUPLING_K1 if vary == "k_i" else _SPRING_K1)


def _validate_config(cfg):
    sweep = cfg.get("sweep")
    if sweep is not None:
        if sweep["points"] < 2:
            raise ConfigError("sweep.points must be at least 2")
        if not (0 < sweep["lo"] < sweep["hi"]):
            raise ConfigError("sweep bounds need 0 < lo < hi")
        if sweep["scale"] not in ("log", "linear"):
            raise ConfigError("sweep.scale must be 'log' or 'linear'")
    if "k1" in cfg and not isinstance(cfg["k1"], (list, tuple)):
        cfg["k1"] = [float(cfg["k1"])]
    if "curve_values" in cfg and cfg["curve_values"] is not None:
        if not isinstance(cfg["curve_values"], (list, tuple)):
            cfg["curve_values"] = [float(cfg["curve_values"])]
    if cfg["experiment"] == "coulomb-report":
        for nl in cfg["states"]:
            if len(nl) != 2:
                raise ConfigError(f"states entries are [n, l] pairs, got {nl!r}")


def _sweep_values(sweep):
    lo, hi, n = sweep["lo"], sweep["hi"], sweep["points"]
    if sweep["scale"] == "log":
        return np.logspace(np.log10(lo), np.log10(hi), n)
    return np.linspace(lo, hi, n)


# ---------------------------------------------------------------------------
# TOML emission (resolved config snapshot)


def _toml_scalar(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_toml_scalar(x) for x in v) + "]"
    raise TypeError(f"cannot serialize {v!r} to TOML")


def _toml_lines(d, prefix=""):
    scalars = [(k, v) for k, v in d.items() if not isinstance(v, dict)]
    tables = [(k, v) for k, v in d.items() if isinstance(v, dict)]
    lines = [f"{k} = {_toml_scalar(v)}" for k, v in scalars]
    for k, v in tables:
        name = f"{prefix}.{k}" if prefix else k
        lines.append("")
        lines.append(f"[{name}]")
        lines.extend(_toml_lines(v, name))
    return lines


def write_resolved_config(cfg, out_dir):
    path = Path(out_dir) / "config.resolved.toml"
    path.write_text("\n".join(_toml_lines(cfg)) + "\n")
    return path


# ---------------------------------------------------------------------------
# CSV emission


def _csv_cell(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path, header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_csv_cell(row[col]) for col in header))
    Path(path).write_text("\n".join(lines) + "\n")
    return path


# ---------------------------------------------------------------------------
# sweep workers (top level so ProcessPoolExecutor can pickle them)


def _build_params(vary, curve, k0, Tf, base, ramped):
    vals = dict(base)
    if ramped:
        vals[vary] = RampSchedule(k0, curve, Tf)
    else:
        vals[vary] = curve
    return vals


def _static_point(task):
    ratio, vals, m_s = task
    p = OscillatorParams(m_s, m_s * ratio, vals["kappa_s"], vals["kappa_f"], vals["k_i"])
    return static_fidelity(p)


def _dynamic_point(task):
    ratio, vals, m_s, Tf, method, steps = task
    p = OscillatorParams(m_s, m_s * ratio, vals["kappa_s"], vals["kappa_f"], vals["k_i"])
    res = evolve_cbod(p, Tf, steps=steps or None, method=method)
    return (
        res.fidelity,
        res.diagnostics["residual"],
        res.diagnostics["gamma_valid"],
    )


def _run_tasks(fn, tasks, jobs):
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, tasks, chunksize=1))
    return [fn(t) for t in tasks]


# ---------------------------------------------------------------------------
# experiments


def _curve_label(vary, value, ramped):
    return f"{vary}: {value:g}" if not ramped else f"{vary} ramp k1={value:g}"


def run_static_fidelity(cfg, jobs=1):
    base = {k: v for k, v in cfg["params"].items() if k != "m_s"}
    m_s = cfg["params"]["m_s"]
    ratios = _sweep_values(cfg["sweep"])
    curves = [(cfg["vary"], v) for v in cfg["curve_values"]]
    if cfg["control_zero_coupling"]:
        curves.append(("k_i", 0.0))
    tasks, keys = [], []
    for vary, val in curves:
        vals = dict(base)
        vals[vary] = val
        for ratio in ratios:
            tasks.append((float(ratio), vals, m_s))
            keys.append((vals, float(ratio)))
    out = _run_tasks(_static_point, tasks, jobs)
    rows = [
        {
            "mass_ratio": ratio,
            "kappa_s": vals["kappa_s"],
            "kappa_f": vals["kappa_f"],
            "k_i": vals["k_i"],
            "fidelity": fid,
        }
        for (vals, ratio), fid in zip(keys, out)
    ]
    header = ["mass_ratio", "kappa_s", "kappa_f", "k_i", "fidelity"]
    n = len(ratios)
    plot_curves = [
        (_curve_label(vary, val, False), ratios, [r["fidelity"] for r in rows[i * n:(i + 1) * n]])
        for i, (vary, val) in enumerate(curves)
    ]
    return header, rows, ("m_F/m_S", "fidelity", True, plot_curves)


def _dynamic_common(cfg):
    base = {k: v for k, v in cfg["params"].items() if k != "m_s"}
    vary = cfg["vary"]
    if vary in base:
        del base[vary]
    return base, cfg["params"]["m_s"], vary


def _check_validity(vals, m_s, ratio, Tf):
    p = OscillatorParams(m_s, m_s * ratio, vals["kappa_s"], vals["kappa_f"], vals["k_i"])
    report = validate(p, Tf)
    if not report.ok:
        raise PhysicsValidityError(
            f"parameters violate {report.reason} at t={report.first_violation_time:g}"
        )
    return p


def run_ramp_fidelity(cfg, jobs=1):
    base, m_s, vary = _dynamic_common(cfg)
    Tf = cfg["Tf"]
    ratios = _sweep_values(cfg["sweep"])
    solver = cfg["solver"]
    tasks, keys = [], []
    for k1 in cfg["k1"]:
        vals = dict(base)
        vals[vary] = RampSchedule(cfg["k0"], k1, Tf)
        _check_validity(vals, m_s, float(ratios[0]), Tf)
        for ratio in ratios:
            tasks.append((float(ratio), vals, m_s, Tf, solver["method"], solver["steps"]))
            keys.append((float(k1), float(ratio)))
    out = _run_tasks(_dynamic_point, tasks, jobs)
    rows = [
        {
            "mass_ratio": ratio,
            "k1": k1,
            "Tf": Tf,
            "fidelity": fid,
            "ermakov_residual": resid,
            "validity_flag": valid,
        }
        for (k1, ratio), (fid, resid, valid) in zip(keys, out)
    ]
    header = ["mass_ratio", "k1", "Tf", "fidelity", "ermakov_residual", "validity_flag"]
    n = len(ratios)
    plot_curves = [
        (_curve_label(vary, k1, True), ratios, [r["fidelity"] for r in rows[i * n:(i + 1) * n]])
        for i, k1 in enumerate(cfg["k1"])
    ]
    return header, rows, ("m_F/m_S", "fidelity", True, plot_curves)


def run_time_sweep(cfg, jobs=1):
    base, m_s, vary = _dynamic_common(cfg)
    ratio = cfg["mass_ratio"]
    times = _sweep_values(cfg["sweep"])
    solver = cfg["solver"]
    tasks, keys = [], []
    for k1 in cfg["k1"]:
        for Tf in times:
            Tf = float(Tf)
            vals = dict(base)
            vals[vary] = RampSchedule(cfg["k0"], k1, Tf)
            if Tf == times[0]:
                _check_validity(vals, m_s, ratio, Tf)
            tasks.append((ratio, vals, m_s, Tf, solver["method"], solver["steps"]))
            keys.append((float(k1), Tf))
    out = _run_tasks(_dynamic_point, tasks, jobs)
    rows = [
        {
            "mass_ratio": ratio,
            "k1": k1,
            "Tf": Tf,
            "fidelity": fid,
            "ermakov_residual": resid,
            "validity_flag": valid,
        }
        for (k1, Tf), (fid, resid, valid) in zip(keys, out)
    ]
    header = ["mass_ratio", "k1", "Tf", "fidelity", "ermakov_residual", "validity_flag"]
    n = len(times)
    plot_curves = [
        (_curve_label(vary, k1, True), times, [r["fidelity"] for r in rows[i * n:(i + 1) * n]])
        for i, k1 in enumerate(cfg["k1"])
    ]
    return header, rows, ("T_f", "fidelity", True, plot_curves)


def run_coulomb_report(cfg, jobs=1):
    states = [
        coulomb.HydrogenicState(int(n), int(l), g=cfg["g"], m_f=cfg["m_f"])
        for n, l in cfg["states"]
    ]
    rows = coulomb.comparison_report(
        states, gdot=cfg["gdot"], n_nodes=cfg["quadrature_nodes"]
    )
    header = [
        "n",
        "l",
        "berry_formula",
        "berry_numeric",
        "diagonal_cd_mean",
        "formula_vs_numeric_flag",
        "printed_bracket_max_dev",
        "n_poles",
    ]
    prof = cfg["profile"]
    plot_curves = []
    for s in states:
        r = np.linspace(1e-3, prof["r_max_bohr"], prof["points"]) * s.bohr_radius
        profile = coulomb.cd_potential(s, cfg["gdot"], r)
        coeff = np.array(profile.coefficient, dtype=float)
        coeff[~np.isfinite(coeff)] = np.nan
        coeff = np.clip(coeff, -15.0, 15.0)
        plot_curves.append((f"n={s.n} l={s.l}", r / s.bohr_radius, coeff))
    return header, rows, ("r / a", "CD coefficient (gdot/g units)", False, plot_curves)


def run_oracle_check(cfg, jobs=1):
    checks = run_oracle_suite()
    rows = [
        {
            "check": c.name,
            "measured": c.measured,
            "threshold": c.threshold,
            "passed": c.ok,
        }
        for c in checks
    ]
    header = ["check", "measured", "threshold", "passed"]
    for c in checks:
        flag = "PASS" if c.ok else "FAIL"
        print(f"{flag}  {c.name}: {c.measured:.3e} (threshold {c.threshold:.0e}, {c.seconds:.2f}s)")
        if c.detail:
            print(f"      {c.detail}")
    return header, rows, None


RUNNERS = {
    "static-fidelity": run_static_fidelity,
    "ramp-fidelity": run_ramp_fidelity,
    "time-sweep": run_time_sweep,
    "coulomb-report": run_coulomb_report,
    "oracle-check": run_oracle_check,
}


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="cbod",
        description="sweep experiments for counterdiabatic driving of coupled oscillators",
    )
    parser.add_argument("experiment", choices=EXPERIMENTS)
    parser.add_argument("--config", help="TOML config file")
    parser.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override one config entry (repeatable, dotted keys allowed)",
    )
    parser.add_argument("--jobs", type=int, default=1, help="parallel sweep workers")
    parser.add_argument("--out", default=".", help="output directory")
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1

    try:
        cfg = resolve_config(args.experiment, args.config, args.overrides)
    except (ConfigError, tomllib.TOMLDecodeError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1

    out_dir = Path(args.out)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"config error: cannot create output directory: {exc}", file=sys.stderr)
        return 1

    runner = RUNNERS[args.experiment]
    try:
        header, rows, plot_spec = runner(cfg, jobs=max(1, args.jobs))
    except (
        PhysicsValidityError,
        ImaginaryFrequencyError,
        ErmakovSingularityError,
        EvolutionDivergedError,
    ) as exc:
        print(f"physics validity error: {exc}", file=sys.stderr)
        return 2
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1

    write_resolved_config(cfg, out_dir)
    csv_path = out_dir / f"{args.experiment}.csv"
    write_csv(csv_path, header, rows)
    print(f"wrote {csv_path}")
    if plot_spec is not None:
        xlabel, ylabel, log_x, curves = plot_spec
        svg_path = out_dir / f"{args.experiment}.svg"
        plots.line_plot(svg_path, curves, xlabel, ylabel, log_x=log_x)
        print(f"wrote {svg_path}")

    if args.experiment == "oracle-check" and not all(r["passed"] for r in rows):
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
