"""Scenario runner: parse JSON configs, run design/simulate/audit pipelines,
emit CSV/JSON artifacts with scripting-friendly exit codes.

Exit codes: 0 success, 1 infeasible merge verdict, 2 usage or input error,
3 profile-design infeasibility, 4 simulation abort.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .controller import ControllerGains, StallError
from .profiles import (
    DegenerateProfileError,
    InfeasibleTargetError,
    OptimizationFailureError,
    ProfileInconsistencyError,
    ShapingProfile,
    acceleration_profiles,
    constant_profile,
    design_profile,
    kinematics_at,
    optimize_gamma,
)
from .safety import (
    InfeasibleTimeGapError,
    SafetyParams,
    min_time_gap_point,
    safe_time_gap,
)
from .sim import (
    LocationGrid,
    ScenarioConfig,
    SimulationAbort,
    audit_merge,
    default_grid,
    read_trace_csv,
    simulate_platoon,
    write_trace_csv,
)

EXIT_OK = 0
EXIT_INFEASIBLE = 1
EXIT_USAGE = 2
EXIT_DESIGN = 3
EXIT_SIM = 4

_DESIGN_ERRORS = (
    InfeasibleTargetError,
    DegenerateProfileError,
    OptimizationFailureError,
    ProfileInconsistencyError,
    InfeasibleTimeGapError,
)

_ERROR_REASONS = {
    InfeasibleTargetError: "infeasible-target",
    DegenerateProfileError: "degenerate-profile",
    OptimizationFailureError: "optimization-failure",
    ProfileInconsistencyError: "profile-inconsistency",
    InfeasibleTimeGapError: "infeasible-time-gap",
    StallError: "stall",
    SimulationAbort: "ordering-violation",
}


class ConfigError(ValueError):
    """Malformed or unknown content in a scenario config."""


def _fmt(x) -> str:
    return f"{x:.9g}"


def _emit_error(exc: Exception) -> None:
    payload = {"status": "error", "reason": _ERROR_REASONS.get(type(exc), "error"),
               "message": str(exc)}
    if isinstance(exc, SimulationAbort):
        payload["location"] = exc.location
        if exc.pair is not None:
            payload["pair"] = list(exc.pair)
    print(json.dumps(payload, sort_keys=True))


def _check_keys(section: dict, allowed, where: str) -> None:
    unknown = sorted(set(section) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown key(s) {unknown} in {where}")


def load_config(path) -> dict:
    """Read and structurally validate a scenario config (fail-closed)."""
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError(f"{path}: config root must be an object")
    _check_keys(cfg, {"name", "safety", "profile", "gains", "grid", "vehicles",
                      "perturbations"}, "config root")
    for required in ("safety", "profile"):
        if required not in cfg:
            raise ConfigError(f"{path}: missing required section '{required}'")
    _check_keys(cfg["safety"], {"l", "a_min"}, "safety")
    _check_keys(cfg["profile"], {"tau0", "tau_odd_end", "gamma", "center_s",
                                 "decel_limit"}, "profile")
    if "gains" in cfg:
        _check_keys(cfg["gains"], {"p", "p0", "p1", "u_max"}, "gains")
    if "grid" in cfg:
        _check_keys(cfg["grid"], {"s_start", "s_end", "step_h"}, "grid")
    if "vehicles" in cfg:
        _check_keys(cfg["vehicles"], {"count", "initial", "entry_times",
                                      "entry_velocities"}, "vehicles")
    if "perturbations" in cfg:
        if not isinstance(cfg["perturbations"], list):
            raise ConfigError("perturbations must be a list")
        for entry in cfg["perturbations"]:
            _check_keys(entry, {"index", "dt0", "dv0"}, "perturbations entry")
            if "index" not in entry:
                raise ConfigError("perturbations entry missing 'index'")
    return cfg


def _safety_params(cfg: dict) -> SafetyParams:
    section = cfg["safety"]
    try:
        return SafetyParams(float(section["l"]), float(section["a_min"]))
    except KeyError as exc:
        raise ConfigError(f"safety section missing {exc}") from exc


def _resolve_profile(cfg: dict, gamma_override=None):
    """Build the shaping profile; returns (profile, gamma_was_optimized, bound).

    A profile section without tau_odd_end selects the no-shaping constant
    baseline at tau0.
    """
    params = _safety_params(cfg)
    section = cfg["profile"]
    try:
        tau0 = float(section["tau0"])
    except KeyError as exc:
        raise ConfigError(f"profile section missing {exc}") from exc
    center = float(section.get("center_s", 0.0))
    decel_limit = section.get("decel_limit")
    decel_limit = None if decel_limit is None else float(decel_limit)

    if "tau_odd_end" not in section:
        if "gamma" in section or gamma_override is not None:
            raise ConfigError("gamma is meaningless without tau_odd_end")
        return constant_profile(tau0, params), False, decel_limit
    tau_end = float(section["tau_odd_end"])

    gamma = gamma_override if gamma_override is not None else section.get("gamma")
    optimized = gamma is None
    if optimized:
        gamma = optimize_gamma(tau0, tau_end, params, decel_limit=decel_limit)
    profile = design_profile(tau0, tau_end, float(gamma), center, params)
    return profile, optimized, decel_limit


def _resolve_gains(cfg: dict) -> ControllerGains:
    section = cfg.get("gains", {})
    u_max = section.get("u_max")
    return ControllerGains(
        p=float(section.get("p", 0.5)),
        p0=float(section.get("p0", 0.25)),
        p1=float(section.get("p1", 1.0)),
        u_max=None if u_max is None else float(u_max),
    )


def _resolve_grid(cfg: dict, profile: ShapingProfile, h_override=None) -> LocationGrid:
    if "grid" in cfg:
        section = cfg["grid"]
        step = float(h_override) if h_override is not None else float(section["step_h"])
        return LocationGrid(float(section["s_start"]), float(section["s_end"]), step)
    return default_grid(profile, float(h_override) if h_override is not None else 0.01)


def _resolve_scenario(cfg: dict, profile, gains, grid) -> ScenarioConfig:
    section = cfg.get("vehicles", {"count": 10})
    count = int(section.get("count", 10))
    initial = section.get("initial")
    if initial is not None and initial != "ideal":
        raise ConfigError(f"vehicles.initial must be 'ideal' or omitted, got {initial!r}")
    entry_times = section.get("entry_times")
    entry_velocities = section.get("entry_velocities")
    if initial == "ideal" and (entry_times is not None or entry_velocities is not None):
        raise ConfigError("vehicles.initial 'ideal' conflicts with explicit entry arrays")

    dt0 = dv0 = None
    if cfg.get("perturbations"):
        dt0 = np.zeros(count)
        dv0 = np.zeros(count)
        for entry in cfg["perturbations"]:
            idx = int(entry["index"])
            if not 0 <= idx < count:
                raise ConfigError(f"perturbation index {idx} out of range")
            dt0[idx] += float(entry.get("dt0", 0.0))
            dv0[idx] += float(entry.get("dv0", 0.0))

    return ScenarioConfig(
        profile=profile, gains=gains, n_vehicles=count, grid=grid,
        entry_times=entry_times, entry_velocities=entry_velocities,
        perturb_dt0=dt0, perturb_dv0=dv0,
        name=str(cfg.get("name", "scenario")),
    )


def _out_dir(args) -> Path:
    out = args.out
    if not getattr(args, "no_env", False):
        out = os.environ.get("PLATOON_OUT") or out
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_json(path: Path, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _timestamp() -> str:
    return datetime.now(timezone.utc).isoformat()


def _profile_dict(profile: ShapingProfile) -> dict:
    return {
        "tau0": profile.tau0,
        "tau_odd_end": profile.tau_odd_end,
        "alpha": profile.alpha,
        "beta": profile.beta,
        "gamma": profile.gamma,
        "center_s": profile.center_s,
        "safety": {"l": profile.params.vehicle_length_l, "a_min": profile.params.a_min},
    }


def cmd_safety_curve(args) -> int:
    if args.config:
        params = _safety_params(load_config(args.config))
    else:
        params = SafetyParams(args.l, args.a_min)
    if args.n_samples < 2:
        raise ConfigError(f"n_samples must be >= 2, got {args.n_samples}")
    if not 0 < args.v_min <= args.v_max:
        raise ConfigError("need 0 < v-min <= v-max")

    out = _out_dir(args)
    v_samples = np.linspace(args.v_min, args.v_max, args.n_samples)
    minimum = min_time_gap_point(params)
    rows = [(float(v), float(safe_time_gap(v, params)), 0) for v in v_samples]
    rows.append((minimum.velocity, minimum.time_gap, 1))
    rows.sort(key=lambda r: (r[0], r[2]))

    path = out / "curve.csv"
    with open(path, "w", newline="") as fh:
        fh.write("v,tau,is_minimum\n")
        for v, tau, flag in rows:
            fh.write(f"{_fmt(v)},{_fmt(tau)},{flag}\n")
    print(path)
    return EXIT_OK


def _design_outputs(cfg: dict, profile, optimized: bool, decel_limit, out: Path,
                    sample_step: float):
    grid = default_grid(profile, sample_step)
    s = grid.points()
    kin = kinematics_at(profile, s)
    a_odd, a_even = acceleration_profiles(profile, s)

    samples_path = out / "profile_samples.csv"
    with open(samples_path, "w", newline="") as fh:
        fh.write("s,tau_odd,tau_even,v_odd,v_des,a_odd,a_even\n")
        for k in range(s.size):
            fh.write(",".join([
                _fmt(s[k]), _fmt(kin.tau_odd[k]), _fmt(kin.tau_even[k]),
                _fmt(kin.v_odd[k]), _fmt(kin.v_des[k]),
                _fmt(a_odd[k]), _fmt(a_even[k]),
            ]) + "\n")

    profile_path = out / "profile.json"
    _write_json(profile_path, _profile_dict(profile))

    manifest = {
        "scenario": str(cfg.get("name", "scenario")),
        "timestamp": _timestamp(),
        "gamma": profile.gamma,
        "gamma_optimized": optimized,
        "decel_limit": decel_limit if decel_limit is not None else profile.params.a_min,
        "config": cfg,
        "outputs": {"profile_json": str(profile_path),
                    "profile_samples_csv": str(samples_path)},
        "min_acceleration": {"odd": float(a_odd.min()), "even": float(a_even.min())},
    }
    _write_json(out / "design_manifest.json", manifest)
    return manifest


def cmd_design(args) -> int:
    cfg = load_config(args.config)
    out = _out_dir(args)
    profile, optimized, decel_limit = _resolve_profile(cfg, args.gamma)
    sample_step = args.h if args.h is not None else 0.1
    _design_outputs(cfg, profile, optimized, decel_limit, out, sample_step)
    print(out / "design_manifest.json")
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    out = _out_dir(args)
    profile, optimized, decel_limit = _resolve_profile(cfg, args.gamma)
    gains = _resolve_gains(cfg)
    grid = _resolve_grid(cfg, profile, args.h)
    scenario = _resolve_scenario(cfg, profile, gains, grid)

    trace = simulate_platoon(scenario)
    trace_path = out / "trace.csv"
    write_trace_csv(trace, trace_path)

    bound = decel_limit if decel_limit is not None else profile.params.a_min
    summary = trace.summary
    checks = {
        "safety_margin": {
            "pass": summary["min_safety_margin"] is None
                    or summary["min_safety_margin"] >= -1e-6,
            "value": summary["min_safety_margin"],
        },
        "acceleration": {
            "pass": summary["min_acceleration"] >= -bound - 0.05,
            "value": summary["min_acceleration"],
        },
        "convergence": {
            "pass": summary["convergence_s"] is not None,
            "value": summary["convergence_s"],
        },
    }
    manifest = {
        "scenario": scenario.name,
        "timestamp": _timestamp(),
        "seed": args.seed,
        "gamma": profile.gamma,
        "gamma_optimized": optimized,
        "config": cfg,
        "grid": {"s_start": grid.s_start, "s_end": grid.s_end, "step_h": grid.step_h},
        "outputs": {"trace_csv": str(trace_path)},
        "summary": summary,
        "checks": checks,
    }
    _write_json(out / "manifest.json", manifest)
    print(out / "manifest.json")
    return EXIT_OK


def cmd_audit_merge(args) -> int:
    cfg = load_config(args.config)
    params = _safety_params(cfg)
    trace_path = Path(args.trace)
    if not trace_path.exists():
        raise ConfigError(f"trace file not found: {trace_path}")
    trace = read_trace_csv(trace_path)

    sub_times = []
    if args.sub_times:
        sub_times = [float(x) for x in args.sub_times.split(",") if x.strip() != ""]

    report = audit_merge(trace, sub_times, args.sub_velocity, params)
    out = _out_dir(args)
    path = out / "merge_report.json"
    _write_json(path, report.to_dict())
    print(path)
    return EXIT_OK if report.feasible else EXIT_INFEASIBLE


def _sweep_one(config_path: str, out_root: str, h, gamma, seed) -> tuple:
    """Run design + simulate for one config into its own subdirectory."""
    cfg = load_config(config_path)
    name = str(cfg.get("name", Path(config_path).stem))
    out = Path(out_root) / name
    # scenarios already live under the resolved sweep root, so the
    # PLATOON_OUT override must not apply a second time
    ns = argparse.Namespace(config=config_path, out=str(out), gamma=gamma, h=h,
                            seed=seed, no_env=True)
    try:
        code = cmd_design(ns)
        if code == EXIT_OK:
            code = cmd_simulate(ns)
    except ConfigError:
        code = EXIT_USAGE
    except _DESIGN_ERRORS as exc:
        _emit_error(exc)
        code = EXIT_DESIGN
    except (StallError, SimulationAbort) as exc:
        _emit_error(exc)
        code = EXIT_SIM
    return name, code


def cmd_sweep(args) -> int:
    out = _out_dir(args)
    worst = EXIT_OK
    if args.jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=args.jobs) as pool:
            futures = [
                pool.submit(_sweep_one, path, str(out), args.h, args.gamma, args.seed)
                for path in args.configs
            ]
            results = [f.result() for f in futures]
    else:
        results = [_sweep_one(path, str(out), args.h, args.gamma, args.seed)
                   for path in args.configs]
    for name, code in results:
        print(f"{name}: {'ok' if code == EXIT_OK else f'exit {code}'}")
        worst = max(worst, code)
    return worst


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="platoon",
        description="Design, simulate and audit traffic-shaping platoon scenarios.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, with_config=True, config_required=True):
        if with_config:
            p.add_argument("--config", required=config_required,
                           help="scenario config JSON")
        p.add_argument("--out", default="out", help="output directory (env PLATOON_OUT overrides)")
        p.add_argument("--gamma", type=float, default=None, help="override profile steepness [1/m]")
        p.add_argument("--h", type=float, default=None, help="override grid step [m]")
        p.add_argument("--seed", type=int, default=None,
                       help="reserved; no stochastic components in v1")

    p_curve = sub.add_parser("safety-curve", help="sample the safe time-gap curve")
    add_common(p_curve, config_required=False)
    p_curve.add_argument("--l", type=float, default=6.0, help="vehicle length [m]")
    p_curve.add_argument("--a-min", type=float, default=4.0, dest="a_min",
                         help="max deceleration magnitude [m/s^2]")
    p_curve.add_argument("--v-min", type=float, default=2.0, dest="v_min")
    p_curve.add_argument("--v-max", type=float, default=30.0, dest="v_max")
    p_curve.add_argument("--n-samples", type=int, default=100, dest="n_samples")
    p_curve.set_defaults(func=cmd_safety_curve)

    p_design = sub.add_parser("design", help="design profiles, optimizing gamma if absent")
    add_common(p_design)
    p_design.set_defaults(func=cmd_design)

    p_sim = sub.add_parser("simulate", help="integrate the platoon and write trace CSV")
    add_common(p_sim)
    p_sim.set_defaults(func=cmd_simulate)

    p_audit = sub.add_parser("audit-merge", help="audit substream interleaving feasibility")
    add_common(p_audit)
    p_audit.add_argument("--trace", required=True, help="mainstream trace CSV")
    p_audit.add_argument("--sub-times", default="", dest="sub_times",
                         help="comma-separated substream passage times at the grid end [s]")
    p_audit.add_argument("--sub-velocity", type=float, default=None, dest="sub_velocity",
                         help="merged operating velocity [m/s]; default: curve minimum")
    p_audit.set_defaults(func=cmd_audit_merge)

    p_sweep = sub.add_parser("sweep", help="run several scenarios into one output root")
    add_common(p_sweep, with_config=False)
    p_sweep.add_argument("configs", nargs="+", help="scenario config files")
    p_sweep.add_argument("--jobs", type=int, default=1, help="parallel scenario workers")
    p_sweep.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except _DESIGN_ERRORS as exc:
        _emit_error(exc)
        return EXIT_DESIGN
    except (StallError, SimulationAbort) as exc:
        _emit_error(exc)
        return EXIT_SIM
    except (FileNotFoundError, ValueError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
