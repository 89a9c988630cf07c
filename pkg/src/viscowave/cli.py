"""Command-line front end: problems in, CSV/JSON/figures out.

One flat config dict drives every command.  Precedence is defaults,
then --config file, then named flags, then --set key=value pairs; the
resolved config is written next to the outputs so any run can be
reproduced from its own artifacts.

Exit codes: 0 success, 2 configuration or validation, 3 numerical
(truncation or convergence), 4 I/O.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import replace

import numpy as np

from . import report
from .asymptotics import (
    BOUND_IDS,
    DEFAULT_EPS_SWEEP,
    BoundExponents,
    fit_constants,
    default_pairs,
)
from .errors import ConfigError, ConvergenceError, TruncationError, ValidationError
from .kernels import MediumParams, Truncation, green_function
from .oracle import OracleConfig, integrate
from .problem import PROBLEM_BUNDLES, Grid, NeumannProblem, read_field_csv
from .solver import boundary_flux_error, pde_residual, solve

_DEFAULTS: dict = {
    "a": 0.5,
    "eps": 0.1,
    "kind": "perturbed",
    "x": [math.pi / 2],
    "xi": [math.pi / 2],
    "t": [1.0],
    "nx": 201,
    "nt": 2001,
    "T": 10.0,
    "max_modes": 65536,
    "tail_tol": 1e-10,
    "preset": "smooth-mixed",
    "source_mode": "operator_applied",
    "f0_csv": None,
    "f1_csv": None,
    "source_csv": None,
    "oracle_nx": 201,
    "oracle_dt": 0.005,
    "oracle_theta": 0.5,
    "oracle_check": False,
    "bound": "kernel-gap",
    "eps_list": list(DEFAULT_EPS_SWEEP),
    "t_min": 0.01,
    "t_max": 50.0,
    "t_points": 33,
    "pair_count": 5,
    "gamma": 0.75,
    "delta": 1.0,
    "eta": 0.5,
    "k": 0.25,
    "sweep_max_modes": 2048,
    "sweep_tail_tol": 1e-8,
    "threads": 1,
    "plots": True,
    "out": "out",
}

_INT_KEYS = ("nx", "nt", "max_modes", "sweep_max_modes", "oracle_nx",
             "t_points", "pair_count", "threads")
_FLOAT_KEYS = ("a", "eps", "T", "tail_tol", "oracle_dt", "oracle_theta",
               "t_min", "t_max", "gamma", "delta", "eta", "k", "sweep_tail_tol")
_BOOL_KEYS = ("oracle_check", "plots")
_STR_KEYS = ("kind", "preset", "source_mode", "bound", "out")
_LIST_KEYS = ("x", "xi", "t", "eps_list")
_PATH_KEYS = ("f0_csv", "f1_csv", "source_csv")


def _parse_set_value(raw: str):
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        return raw


def _coerce(cfg: dict) -> dict:
    out = dict(cfg)
    try:
        for k in _INT_KEYS:
            out[k] = int(out[k])
        for k in _FLOAT_KEYS:
            out[k] = float(out[k])
        for k in _BOOL_KEYS:
            v = out[k]
            if isinstance(v, str):
                if v.lower() not in ("true", "false"):
                    raise ConfigError(f"{k} must be true or false, got {v!r}")
                v = v.lower() == "true"
            out[k] = bool(v)
        for k in _STR_KEYS:
            out[k] = str(out[k])
        for k in _LIST_KEYS:
            v = out[k]
            if isinstance(v, (int, float)):
                v = [v]
            if isinstance(v, str):
                v = [float(p) for p in v.split(",") if p.strip()]
            out[k] = [float(p) for p in v]
        for k in _PATH_KEYS:
            if out[k] is not None:
                out[k] = str(out[k])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad config value: {exc}") from exc
    return out


def resolve_config(args: argparse.Namespace) -> dict:
    cfg = dict(_DEFAULTS)
    if args.config:
        with open(args.config) as fh:
            try:
                loaded = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{args.config}: invalid JSON ({exc})") from exc
        if not isinstance(loaded, dict):
            raise ConfigError(f"{args.config}: config must be a JSON object")
        for k in loaded:
            if k not in _DEFAULTS:
                raise ConfigError(f"{args.config}: unknown config key {k!r}")
        cfg.update(loaded)
    if args.preset is not None:
        cfg["preset"] = args.preset
    if args.threads is not None:
        cfg["threads"] = args.threads
    if args.out is not None:
        cfg["out"] = args.out
    if args.no_plots:
        cfg["plots"] = False
    for pair in args.set or []:
        if "=" not in pair:
            raise ConfigError(f"--set expects key=value, got {pair!r}")
        key, raw = pair.split("=", 1)
        key = key.strip()
        if key not in _DEFAULTS:
            raise ConfigError(f"unknown config key {key!r}")
        cfg[key] = _parse_set_value(raw)
    return _coerce(cfg)


def _out_dir(cfg: dict) -> str:
    path = cfg["out"]
    os.makedirs(path, exist_ok=True)
    return path


def _emit_config(cfg: dict, command: str, out: str) -> None:
    payload = {"command": command}
    payload.update(cfg)
    report.write_json(os.path.join(out, "config.json"), payload)


def _truncation(cfg: dict) -> Truncation:
    return Truncation(max_modes=cfg["max_modes"], tail_tol=cfg["tail_tol"])


def _build_problem(cfg: dict, params: MediumParams, grid: Grid) -> NeumannProblem:
    bundle = PROBLEM_BUNDLES.get(cfg["preset"])
    if bundle is None:
        raise ConfigError(
            f"unknown preset {cfg['preset']!r}; available: {sorted(PROBLEM_BUNDLES)}"
        )
    problem = NeumannProblem.from_presets(params, grid, **bundle)
    overrides = {}
    for field_name, key in (("f0", "f0_csv"), ("f1", "f1_csv"), ("source", "source_csv")):
        if cfg[key]:
            overrides[field_name] = read_field_csv(cfg[key])
    if overrides:
        problem = replace(problem, **overrides)
    return problem


def cmd_green(cfg: dict, out: str) -> None:
    params = MediumParams(a=cfg["a"], eps=cfg["eps"])
    trunc = _truncation(cfg)
    rows = []
    for x in cfg["x"]:
        for xi in cfg["xi"]:
            for t in cfg["t"]:
                gv = green_function(params, cfg["kind"], x, xi, t, trunc)
                rows.append({
                    "x": x, "xi": xi, "t": t, "g": gv.value,
                    "tail_bound": gv.tail_bound, "modes": gv.modes_used,
                })
    report.write_green_csv(os.path.join(out, "green.csv"), rows)
    report.write_json(os.path.join(out, "green.json"), {
        "a": params.a, "eps": params.eps, "kind": cfg["kind"],
        "max_modes": trunc.max_modes, "tail_tol": trunc.tail_tol,
        "points": len(rows),
        "max_tail_bound": max(r["tail_bound"] for r in rows),
    })
    if cfg["plots"] and len(cfg["t"]) > 1:
        report.plot_green_rows(os.path.join(out, "green.png"), rows)


def cmd_solve(cfg: dict, out: str) -> None:
    params = MediumParams(a=cfg["a"], eps=cfg["eps"])
    grid = Grid(nx=cfg["nx"], nt=cfg["nt"], T=cfg["T"])
    trunc = _truncation(cfg)
    problem = _build_problem(cfg, params, grid)
    field = solve(problem, kind=cfg["kind"], trunc=trunc, source_mode=cfg["source_mode"])
    _res, res_sup = pde_residual(field, problem)
    flux_err = boundary_flux_error(
        field,
        None if problem.is_homogeneous() else problem.flux.phi,
        None if problem.is_homogeneous() else problem.flux.psi,
    )
    summary = report.solution_summary(field, residual_sup=res_sup, flux_error=flux_err)
    if cfg["oracle_check"]:
        ocfg = OracleConfig(nx=cfg["oracle_nx"], dt=cfg["oracle_dt"], theta=cfg["oracle_theta"])
        ora = integrate(problem, ocfg, kind=cfg["kind"])
        twin = solve(problem.on_grid(ora.x, ora.t), kind=cfg["kind"],
                     trunc=trunc, source_mode=cfg["source_mode"])
        summary["oracle_gap_sup"] = float(np.max(np.abs(twin.values - ora.values)))
        summary["oracle"] = {"nx": ocfg.nx, "dt": ocfg.dt, "theta": ocfg.theta}
    report.write_solution_csv(os.path.join(out, "solution.csv"), field)
    report.write_json(os.path.join(out, "solution.json"), summary)
    if cfg["plots"]:
        report.plot_field(os.path.join(out, "solution.png"), field)
        report.plot_profiles(os.path.join(out, "profiles.png"), field)


def cmd_oracle(cfg: dict, out: str) -> None:
    params = MediumParams(a=cfg["a"], eps=cfg["eps"])
    grid = Grid(nx=cfg["nx"], nt=cfg["nt"], T=cfg["T"])
    problem = _build_problem(cfg, params, grid)
    ocfg = OracleConfig(nx=cfg["oracle_nx"], dt=cfg["oracle_dt"], theta=cfg["oracle_theta"])
    field = integrate(problem, ocfg, kind=cfg["kind"])
    report.write_solution_csv(os.path.join(out, "oracle.csv"), field)
    report.write_json(os.path.join(out, "oracle.json"), report.solution_summary(field))
    if cfg["plots"]:
        report.plot_field(os.path.join(out, "oracle.png"), field, title="oracle u(x, t)")


def _sweep_inputs(cfg: dict):
    t_grid = np.geomspace(cfg["t_min"], cfg["t_max"], cfg["t_points"])
    pairs = default_pairs(cfg["pair_count"])
    exponents = BoundExponents(gamma=cfg["gamma"], delta=cfg["delta"],
                               eta=cfg["eta"], k=cfg["k"])
    trunc = Truncation(max_modes=cfg["sweep_max_modes"], tail_tol=cfg["sweep_tail_tol"])
    return t_grid, pairs, exponents, trunc


def _run_sweep(cfg: dict, bound: str):
    t_grid, pairs, exponents, trunc = _sweep_inputs(cfg)
    return fit_constants(
        cfg["a"], cfg["eps_list"], t_grid, pairs, bound,
        exponents=exponents, trunc=trunc, problem_preset=cfg["preset"],
        grid=Grid(nx=cfg["nx"], nt=cfg["nt"], T=cfg["t_max"]) if bound == "solution-gap" else None,
        threads=cfg["threads"],
    )


def _emit_sweep(cfg: dict, out: str, bound: str, rep) -> None:
    stem = f"sweep_{bound}"
    report.write_sweep_csv(os.path.join(out, stem + ".csv"), rep)
    report.write_json(os.path.join(out, stem + ".json"), report.sweep_summary(rep))
    if cfg["plots"]:
        report.plot_sweep_ratios(os.path.join(out, stem + "_ratios.png"), rep)
        report.plot_eps_maxima(os.path.join(out, stem + "_maxima.png"), rep)


def cmd_sweep(cfg: dict, out: str) -> None:
    bound = cfg["bound"]
    if bound not in BOUND_IDS:
        raise ConfigError(f"unknown bound {bound!r}; expected one of {BOUND_IDS}")
    rep = _run_sweep(cfg, bound)
    _emit_sweep(cfg, out, bound, rep)


def cmd_bound_check(cfg: dict, out: str) -> None:
    """Run every bound's sweep and judge eps-uniformity of the ratios.

    A negative verdict is a finding, not a malfunction: the command
    exits 0 and writes the verdicts to bound_check.json.
    """
    verdicts = {}
    for bound in BOUND_IDS:
        rep = _run_sweep(cfg, bound)
        _emit_sweep(cfg, out, bound, rep)
        per_eps = rep.meta["per_eps_max_ratio"]
        ordered = [per_eps[repr(float(e))] for e in sorted(cfg["eps_list"], reverse=True)]
        vals = [v for v in ordered if v > 0.0]
        spread = (max(vals) / min(vals)) if vals else float("inf")
        steps = [b / a for a, b in zip(ordered, ordered[1:]) if a > 0.0]
        # Uniformity here means the fitted constant does not degrade as
        # eps shrinks: no step between neighbouring eps doubles the
        # ratio and there is no net growth down the list.  The global
        # spread is reported as well; it exceeds the step spread when
        # the bound is not sharp in eps (ratios that keep shrinking).
        uniform = bool(vals) and all(s < 2.0 for s in steps) \
            and ordered[-1] <= 1.1 * ordered[0]
        verdicts[bound] = {
            "per_eps_max_ratio": per_eps,
            "spread": spread,
            "max_step": max(steps) if steps else None,
            "uniform": uniform,
            "fitted_constant": rep.meta["fitted_constant"],
            "lhs_slope_vs_eps_at_t1": rep.meta.get("lhs_slope_vs_eps_at_t1"),
        }
    report.write_json(os.path.join(out, "bound_check.json"), {
        "verdicts": verdicts,
        "all_uniform": all(v["uniform"] for v in verdicts.values()),
    })


_COMMANDS = {
    "green": cmd_green,
    "solve": cmd_solve,
    "oracle": cmd_oracle,
    "sweep": cmd_sweep,
    "bound-check": cmd_bound_check,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="viscowave",
        description="Spectral solver and asymptotic checks for the viscous wave equation",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in _COMMANDS.items():
        p = sub.add_parser(name, help=fn.__doc__.splitlines()[0] if fn.__doc__ else None)
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--out", help="output directory (default ./out)")
        p.add_argument("--threads", type=int, help="worker threads for sweeps")
        p.add_argument("--preset", help="problem preset name")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override one config key (JSON-parsed value)")
        p.add_argument("--no-plots", action="store_true", help="skip figure rendering")
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        out = _out_dir(cfg)
        _emit_config(cfg, args.command, out)
        _COMMANDS[args.command](cfg, out)
    except (ConfigError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (TruncationError, ConvergenceError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"i/o failure: {exc}", file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
