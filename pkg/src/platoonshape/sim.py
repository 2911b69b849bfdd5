"""Space-domain integration of a controlled platoon, time-domain
reconstruction of trajectories, and merge-feasibility auditing.

The coupled state (t_i, v_i) of all vehicles advances over a uniform
location grid with the classical fixed-step 4th-order scheme. Within each
derivative evaluation the controls are resolved by forward recursion through
the chain: the lead control first, then each follower using its
predecessor's value at the same evaluation point, so the whole-platoon
right-hand side is well defined without any trace interpolation.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.interpolate import PchipInterpolator

from .controller import V_FLOOR, ControllerGains, StallError
from .profiles import Parity, ShapingProfile, kinematics_at, time_gap_at
from .safety import BOUNDARY_TOL, SafetyParams, min_time_gap_point, safe_time_gap

# Sup-norm level below which tracking errors count as converged [s and s/m].
CONVERGENCE_TOL = 1e-3

TRACE_COLUMNS = [
    "s", "i", "parity", "t", "v", "u", "e",
    "delta", "delta_slope", "tau_realized", "tau_desired", "safety_margin",
]


class SimulationAbort(RuntimeError):
    """Hard invariant violation during integration (e.g. overtaking in time)."""

    def __init__(self, message: str, location: float, pair=None):
        super().__init__(message)
        self.location = location
        self.pair = pair


@dataclass(frozen=True)
class LocationGrid:
    """Uniform grid s_k = s_start + k * step_h over [s_start, s_end]."""

    s_start: float
    s_end: float
    step_h: float

    def __post_init__(self):
        if self.s_start >= self.s_end:
            raise ValueError("s_start must be < s_end")
        if self.step_h <= 0:
            raise ValueError("step_h must be > 0")
        span = self.s_end - self.s_start
        n = round(span / self.step_h)
        if n < 1 or abs(n * self.step_h - span) > 1e-6 * self.step_h:
            raise ValueError("step_h must divide the grid span")

    @property
    def n_steps(self) -> int:
        return round((self.s_end - self.s_start) / self.step_h)

    def points(self) -> np.ndarray:
        return self.s_start + self.step_h * np.arange(self.n_steps + 1)


def default_grid(profile: ShapingProfile, step_h: float = 0.01) -> LocationGrid:
    """Grid spanning [center - 10/gamma, center + 10/gamma].

    At that extent the profile slope has fallen below 1e-8 of its peak, so
    "upstream" and "downstream" limits are meaningful at the boundaries.
    """
    half = 10.0 / profile.gamma
    n = int(np.ceil(2.0 * half / step_h))
    s_start = profile.center_s - half
    return LocationGrid(s_start, s_start + n * step_h, step_h)


@dataclass
class ScenarioConfig:
    """Everything needed to run one platoon simulation.

    Entry times/velocities default to the ideal on-profile values at
    s_start: passage times spaced by the desired gaps and velocities on the
    parity profiles. Perturbations are additive on top of that base.
    """

    profile: ShapingProfile
    gains: ControllerGains
    n_vehicles: int
    grid: Optional[LocationGrid] = None
    entry_times: Optional[Sequence[float]] = None
    entry_velocities: Optional[Sequence[float]] = None
    perturb_dt0: Optional[Sequence[float]] = None
    perturb_dv0: Optional[Sequence[float]] = None
    name: str = "scenario"

    def __post_init__(self):
        if self.n_vehicles < 1:
            raise ValueError("n_vehicles must be >= 1")
        for attr in ("entry_times", "entry_velocities", "perturb_dt0", "perturb_dv0"):
            vals = getattr(self, attr)
            if vals is not None and len(vals) != self.n_vehicles:
                raise ValueError(f"{attr} must have one entry per vehicle")

    def resolved_grid(self) -> LocationGrid:
        return self.grid if self.grid is not None else default_grid(self.profile)


@dataclass
class VehicleTrace:
    """Per-vehicle sampled functions of location; None fields are lead-only gaps."""

    index: int
    parity: Parity
    t: np.ndarray
    v: np.ndarray
    u: np.ndarray
    e: np.ndarray
    tau_desired: np.ndarray
    delta: Optional[np.ndarray] = None
    delta_slope: Optional[np.ndarray] = None
    tau_realized: Optional[np.ndarray] = None
    safety_margin: Optional[np.ndarray] = None


@dataclass
class PlatoonTrace:
    s: np.ndarray
    grid: LocationGrid
    vehicles: list
    config: Optional[ScenarioConfig]
    summary: dict = field(default_factory=dict)


def _parity_signs(n: int) -> np.ndarray:
    return np.where(np.arange(n) % 2 == 0, 1.0, -1.0)


def _initial_state(config: ScenarioConfig, s_start: float):
    """Entry times and velocities; the integrated time state is kept relative
    to entry so that on-profile gap errors stay exactly zero in floating
    point (absolute passage times would pick up rounding dust that the v^3
    control amplification makes visible)."""
    n = config.n_vehicles
    sgn = _parity_signs(n)
    kin = kinematics_at(config.profile, s_start)
    tau_des0 = config.profile.tau0 + sgn * kin.transition

    if config.entry_times is not None:
        t0 = np.asarray(config.entry_times, dtype=float).copy()
    else:
        t0 = np.zeros(n)
        t0[1:] = np.cumsum(tau_des0[1:])
    if config.entry_velocities is not None:
        v0 = np.asarray(config.entry_velocities, dtype=float).copy()
    else:
        v0 = np.where(sgn > 0, float(kin.v_des), float(kin.v_odd))

    if config.perturb_dt0 is not None:
        t0 += np.asarray(config.perturb_dt0, dtype=float)
    if config.perturb_dv0 is not None:
        v0 += np.asarray(config.perturb_dv0, dtype=float)

    if np.any(v0 <= V_FLOOR):
        raise StallError(f"entry velocity at or below floor {V_FLOOR} m/s")
    y = np.concatenate([np.zeros(n), v0])
    return y, t0


class _PlatoonDynamics:
    """Right-hand side of the coupled platoon ODE in the space domain."""

    def __init__(self, config: ScenarioConfig, base_gaps: np.ndarray):
        self.profile = config.profile
        self.gains = config.gains
        self.n = config.n_vehicles
        self.sgn = _parity_signs(self.n)
        self.base_gaps = base_gaps  # entry-time gaps, one per follower

    def eval(self, s: float, y: np.ndarray):
        """Return (dy/ds, u, e, delta, delta_slope) at location s.

        y holds elapsed times since entry followed by velocities.
        """
        n = self.n
        t = y[:n]
        v = y[n:]
        if v.min() <= V_FLOOR:
            i = int(np.argmin(v))
            raise StallError(
                f"vehicle {i} stalled: v={v[i]:.3f} m/s <= floor {V_FLOOR} at s={s:.3f} m"
            )
        kin = kinematics_at(self.profile, s)
        g = self.gains

        inv_v = 1.0 / v
        e = inv_v - kin.inv_v_des

        # u_i / v_i^3 satisfies a pure prefix recursion along the chain, so
        # the forward pass is a cumulative sum.
        w = np.empty(n)
        w[0] = g.p * e[0] - kin.inv_v_des_d1
        if n > 1:
            tau_des = self.profile.tau0 + self.sgn * kin.transition
            tau_d1 = self.sgn * kin.transition_d1
            tau_d2 = self.sgn * kin.transition_d2
            delta = (self.base_gaps - tau_des[1:]) + (t[1:] - t[:-1])
            delta_slope = inv_v[1:] - inv_v[:-1] - tau_d1[1:]
            np.cumsum(g.p0 * delta + g.p1 * delta_slope - tau_d2[1:], out=w[1:])
            w[1:] += w[0]
        else:
            delta = np.empty(0)
            delta_slope = np.empty(0)

        u = w * v * v * v
        if g.u_max is not None:
            np.clip(u, -g.u_max, g.u_max, out=u)

        dy = np.empty(2 * n)
        dy[:n] = inv_v
        dy[n:] = u * inv_v
        return dy, u, e, delta, delta_slope


def simulate_platoon(config: ScenarioConfig) -> PlatoonTrace:
    """Integrate the platoon over the location grid and record full traces.

    Aborts with StallError when any velocity reaches the floor and with
    SimulationAbort when the passage-time ordering t_i(s) > t_{i-1}(s) is
    violated (the space-domain proxy for a collision), reporting the
    location and vehicle pair.
    """
    grid = config.resolved_grid()
    s_pts = grid.points()
    m = s_pts.size
    n = config.n_vehicles
    h = grid.step_h

    y, entry_times = _initial_state(config, float(s_pts[0]))
    base_gaps = np.diff(entry_times)
    dyn = _PlatoonDynamics(config, base_gaps)

    t_rec = np.empty((m, n))
    v_rec = np.empty((m, n))
    u_rec = np.empty((m, n))
    e_rec = np.empty((m, n))
    d_rec = np.empty((m, n - 1)) if n > 1 else np.empty((m, 0))
    ds_rec = np.empty((m, n - 1)) if n > 1 else np.empty((m, 0))

    for k in range(m):
        s = float(s_pts[k])
        if n > 1:
            head = base_gaps + np.diff(y[:n])
            if head.min() <= 0:
                j = int(np.argmin(head))
                raise SimulationAbort(
                    f"time ordering violated at s={s:.3f} m: vehicle {j + 1} "
                    f"would pass vehicle {j}",
                    location=s,
                    pair=(j, j + 1),
                )
        k1, u, e, delta, delta_slope = dyn.eval(s, y)
        t_rec[k] = entry_times + y[:n]
        v_rec[k] = y[n:]
        u_rec[k] = u
        e_rec[k] = e
        d_rec[k] = delta
        ds_rec[k] = delta_slope
        if k == m - 1:
            break
        k2 = dyn.eval(s + 0.5 * h, y + (0.5 * h) * k1)[0]
        k3 = dyn.eval(s + 0.5 * h, y + (0.5 * h) * k2)[0]
        k4 = dyn.eval(s + h, y + h * k3)[0]
        y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    vehicles = []
    params = config.profile.params
    for i in range(n):
        parity = Parity.of_index(i)
        tau_des_i = np.asarray(time_gap_at(config.profile, parity, s_pts)[0])
        if i == 0:
            vehicles.append(
                VehicleTrace(i, parity, t_rec[:, 0], v_rec[:, 0], u_rec[:, 0],
                             e_rec[:, 0], tau_des_i)
            )
            continue
        tau_real = t_rec[:, i] - t_rec[:, i - 1]
        margin = tau_real - safe_time_gap(v_rec[:, i], params)
        vehicles.append(
            VehicleTrace(i, parity, t_rec[:, i], v_rec[:, i], u_rec[:, i],
                         e_rec[:, i], tau_des_i,
                         delta=d_rec[:, i - 1], delta_slope=ds_rec[:, i - 1],
                         tau_realized=tau_real, safety_margin=margin)
        )

    trace = PlatoonTrace(s_pts, grid, vehicles, config)
    trace.summary = _summarize(trace)
    return trace


def _summarize(trace: PlatoonTrace) -> dict:
    vehicles = trace.vehicles
    sup_e = [float(np.max(np.abs(v.e))) for v in vehicles]
    sup_d = [None if v.delta is None else float(np.max(np.abs(v.delta))) for v in vehicles]
    margins = [v.safety_margin for v in vehicles if v.safety_margin is not None]
    min_margin = float(min(np.min(mg) for mg in margins)) if margins else None
    min_u = float(min(np.min(v.u) for v in vehicles))

    # running error level from each location to the end of the grid
    err = np.zeros(trace.s.size)
    for v in vehicles:
        err = np.maximum(err, np.abs(v.e))
        if v.delta is not None:
            err = np.maximum(err, np.abs(v.delta))
    tail_max = np.maximum.accumulate(err[::-1])[::-1]
    below = np.nonzero(tail_max < CONVERGENCE_TOL)[0]
    convergence_s = float(trace.s[below[0]]) if below.size else None

    return {
        "sup_abs_e": sup_e,
        "sup_abs_delta": sup_d,
        "min_acceleration": min_u,
        "min_safety_margin": min_margin,
        "convergence_s": convergence_s,
    }


def reconstruct_time_domain(trace: PlatoonTrace, t_grid) -> np.ndarray:
    """Invert each vehicle's passage-time curve onto a common time grid.

    Returns an array of shape (n_vehicles, len(t_grid)) of locations s_i(t),
    NaN where the vehicle is not inside the simulated domain at that time.
    Uses monotone cubic interpolation, so no overshoot between samples.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    out = np.full((len(trace.vehicles), t_grid.size), np.nan)
    for i, veh in enumerate(trace.vehicles):
        if np.any(np.diff(veh.t) <= 0):
            raise ValueError(f"vehicle {veh.index}: passage time is not strictly increasing")
        inverse = PchipInterpolator(veh.t, trace.s)
        mask = (t_grid >= veh.t[0]) & (t_grid <= veh.t[-1])
        out[i, mask] = inverse(t_grid[mask])
    return out


@dataclass(frozen=True)
class PairGap:
    leader: str
    follower: str
    gap: float
    margin: float


@dataclass
class MergeReport:
    feasible: bool
    merged_velocity: float
    required_gap: float
    worst_margin: Optional[float]
    pairs: list

    def to_dict(self) -> dict:
        return {
            "feasible": self.feasible,
            "merged_velocity": self.merged_velocity,
            "required_gap": self.required_gap,
            "worst_margin": self.worst_margin,
            "pairs": [
                {"leader": p.leader, "follower": p.follower, "gap": p.gap, "margin": p.margin}
                for p in self.pairs
            ],
        }


def audit_merge(
    main: PlatoonTrace,
    sub_entry_times: Sequence[float],
    sub_velocity: Optional[float],
    params: SafetyParams,
) -> MergeReport:
    """Interleave substream passage times into the mainstream at the grid end.

    Every adjacent pair of the merged sequence is checked against the safe
    time-gap at the merged operating velocity. When sub_velocity is None the
    audit uses the curve-minimum velocity, i.e. the most forgiving operating
    point the merged platoon could adopt; a gap infeasible there is
    infeasible at every velocity.
    """
    for veh in main.vehicles:
        worst = abs(float(veh.e[-1]))
        if veh.delta is not None:
            worst = max(worst, abs(float(veh.delta[-1])))
        if worst > CONVERGENCE_TOL:
            raise ValueError(
                f"mainstream trace not downstream-converged: vehicle {veh.index} "
                f"error {worst:.2e} at grid end"
            )

    sub = np.asarray(sub_entry_times, dtype=float)
    if np.any(np.diff(sub) < 0):
        raise ValueError("substream entry times must be sorted ascending")

    merged = [(veh.t[-1], 0, f"main:{veh.index}") for veh in main.vehicles]
    merged += [(float(ts), 1, f"sub:{j}") for j, ts in enumerate(sub)]
    merged.sort(key=lambda item: (item[0], item[1]))

    v_merged = (
        float(sub_velocity)
        if sub_velocity is not None
        else min_time_gap_point(params).velocity
    )
    required = float(safe_time_gap(v_merged, params))

    pairs = []
    for (t_lead, _, lab_lead), (t_follow, _, lab_follow) in zip(merged, merged[1:]):
        gap = float(t_follow - t_lead)
        pairs.append(PairGap(lab_lead, lab_follow, gap, gap - required))

    worst_margin = min((p.margin for p in pairs), default=None)
    feasible = worst_margin is None or worst_margin >= -BOUNDARY_TOL
    return MergeReport(feasible, v_merged, required, worst_margin, pairs)


def _fmt(x) -> str:
    return "" if x is None else f"{x:.9g}"


def write_trace_csv(trace: PlatoonTrace, path) -> None:
    """Write the fixed-schema trace CSV, one row per (vehicle, grid point).

    Floats carry 9 significant digits; lead-only gaps are empty fields. The
    output is byte-identical for identical traces.
    """
    lines = [",".join(TRACE_COLUMNS)]
    for veh in trace.vehicles:
        parity = veh.parity.value
        none_col = [None] * trace.s.size
        delta = veh.delta if veh.delta is not None else none_col
        dslope = veh.delta_slope if veh.delta_slope is not None else none_col
        tau_real = veh.tau_realized if veh.tau_realized is not None else none_col
        margin = veh.safety_margin if veh.safety_margin is not None else none_col
        for k in range(trace.s.size):
            lines.append(",".join([
                _fmt(trace.s[k]), str(veh.index), parity,
                _fmt(veh.t[k]), _fmt(veh.v[k]), _fmt(veh.u[k]), _fmt(veh.e[k]),
                _fmt(delta[k]), _fmt(dslope[k]), _fmt(tau_real[k]),
                _fmt(veh.tau_desired[k]), _fmt(margin[k]),
            ]))
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def read_trace_csv(path) -> PlatoonTrace:
    """Parse a trace CSV back into a PlatoonTrace (without the scenario echo)."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != TRACE_COLUMNS:
            raise ValueError(f"unexpected trace header: {header}")
        per_vehicle: dict = {}
        order = []
        for row in reader:
            i = int(row[1])
            if i not in per_vehicle:
                per_vehicle[i] = {"parity": row[2], "rows": []}
                order.append(i)
            per_vehicle[i]["rows"].append(row)

    if not order:
        raise ValueError("trace CSV holds no data rows")

    def col(rows, j):
        return np.array([float(r[j]) for r in rows])

    def opt_col(rows, j):
        return None if rows[0][j] == "" else np.array([float(r[j]) for r in rows])

    vehicles = []
    s = col(per_vehicle[order[0]]["rows"], 0)
    for i in order:
        rows = per_vehicle[i]["rows"]
        vehicles.append(VehicleTrace(
            index=i,
            parity=Parity(per_vehicle[i]["parity"]),
            t=col(rows, 3), v=col(rows, 4), u=col(rows, 5), e=col(rows, 6),
            tau_desired=col(rows, 10),
            delta=opt_col(rows, 7), delta_slope=opt_col(rows, 8),
            tau_realized=opt_col(rows, 9), safety_margin=opt_col(rows, 11),
        ))

    step = float(s[1] - s[0]) if s.size > 1 else 1.0
    grid = LocationGrid(float(s[0]), float(s[-1]), step)
    trace = PlatoonTrace(s, grid, vehicles, config=None)
    trace.summary = _summarize(trace)
    return trace
