"""Feedback-linearized control laws in the space domain, plus closed-form
solutions of the resulting linear error dynamics (used as simulation oracles).

With location s as the independent variable, each vehicle's state is its
passage time t(s) and velocity v(s). The lead vehicle tracks the desired
velocity profile through the error e0 = 1/v0 - 1/v_des; followers track
their time-gap profile through delta_i = t_i - t_{i-1} - tau_des. Choosing

    u0 = v0^3 * (p * e0 - d(1/v_des)/ds)
    u_i = v_i^3 * (p0 * delta + p1 * delta' + u_{i-1}/v_{i-1}^3 - tau_des'')

cancels the nonlinearity exactly and leaves

    de0/ds = -p * e0,        delta'' = -p0 * delta - p1 * delta'.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

# Below this velocity [m/s] the 1/v and v^3 terms are numerically dangerous
# and the space-domain formulation degrades; the simulator aborts instead.
V_FLOOR = 0.5

# Relative threshold for treating the characteristic roots as repeated.
_REPEATED_ROOT_TOL = 1e-10


class StallError(RuntimeError):
    """Velocity at or below V_FLOOR where the space-domain model breaks down."""


@dataclass(frozen=True)
class ControllerGains:
    """Positive gains of the linearized error dynamics.

    p [1/m] damps the lead velocity error; p0 [1/m^2] and p1 [1/m] are the
    position and rate gains of the follower time-gap error. u_max, when set,
    clamps controls to [-u_max, u_max] (the exact-linearization identities
    then no longer hold).
    """

    p: float = 0.5
    p0: float = 0.25
    p1: float = 1.0
    u_max: float | None = None

    def __post_init__(self):
        if self.p <= 0 or self.p0 <= 0 or self.p1 <= 0:
            raise ValueError(f"gains must be positive, got p={self.p}, p0={self.p0}, p1={self.p1}")
        if self.u_max is not None and self.u_max <= 0:
            raise ValueError(f"u_max must be positive when set, got {self.u_max}")


@dataclass(frozen=True)
class VehicleState:
    """Passage time [s] and velocity [m/s] of one vehicle at a location."""

    t: float
    v: float

    def __post_init__(self):
        if self.v <= V_FLOOR:
            raise StallError(f"velocity {self.v} m/s at or below floor {V_FLOOR}")


@dataclass(frozen=True)
class ErrorState:
    """Tracking errors of one vehicle at a location.

    e: inverse-velocity error 1/v - 1/v_des [s/m]
    delta: time-gap error t_i - t_{i-1} - tau_des [s]
    delta_slope: d(delta)/ds = 1/v_i - 1/v_{i-1} - dtau_des/ds [s/m]
    """

    e: float
    delta: float
    delta_slope: float


def velocity_error(v: float, v_des: float) -> float:
    """Inverse-velocity tracking error 1/v - 1/v_des [s/m]."""
    if v <= 0 or v_des <= 0:
        raise ValueError("velocities must be > 0")
    return 1.0 / v - 1.0 / v_des


def time_gap_error(t_i: float, t_pred: float, tau_des: float) -> float:
    """Time-gap tracking error t_i - t_pred - tau_des [s]."""
    return t_i - t_pred - tau_des


def _clamp(u: float, gains: ControllerGains) -> float:
    if gains.u_max is not None:
        return max(-gains.u_max, min(gains.u_max, u))
    return u


def lead_control(v0: float, e0: float, d_inv_vdes_ds: float, gains: ControllerGains) -> float:
    """Lead-vehicle control [m/s^2] that linearizes de0/ds to -p*e0."""
    if v0 <= V_FLOOR:
        raise StallError(f"lead velocity {v0} m/s at or below floor {V_FLOOR}")
    return _clamp(v0 ** 3 * (gains.p * e0 - d_inv_vdes_ds), gains)


def follower_control(
    state_i: VehicleState,
    pred_v: float,
    pred_u: float,
    err: ErrorState,
    d2tau_ds2: float,
    gains: ControllerGains,
) -> float:
    """Follower control [m/s^2] that linearizes delta'' to -p0*delta - p1*delta'.

    Uses the predecessor's control and velocity at the same location
    (feed-forward over V2V).
    """
    if pred_v <= V_FLOOR:
        raise StallError(f"predecessor velocity {pred_v} m/s at or below floor {V_FLOOR}")
    u = state_i.v ** 3 * (
        gains.p0 * err.delta
        + gains.p1 * err.delta_slope
        + pred_u / pred_v ** 3
        - d2tau_ds2
    )
    return _clamp(u, gains)


def characteristic_roots(gains: ControllerGains):
    """Roots of r^2 + p1*r + p0 = 0; both have negative real part.

    Returns a (r1, r2) tuple of floats for a non-negative discriminant and
    of complex conjugates otherwise, with r1 the smaller (more negative or
    negative-imaginary) root.
    """
    disc = gains.p1 * gains.p1 - 4.0 * gains.p0
    if disc >= 0:
        root = math.sqrt(disc)
        return (-gains.p1 - root) / 2.0, (-gains.p1 + root) / 2.0
    root = cmath.sqrt(disc)
    return (-gains.p1 - root) / 2.0, (-gains.p1 + root) / 2.0


def _is_repeated(gains: ControllerGains) -> bool:
    disc = gains.p1 * gains.p1 - 4.0 * gains.p0
    return abs(disc) < _REPEATED_ROOT_TOL * max(1.0, gains.p1 * gains.p1)


def delta_solution(delta0: float, delta_slope0: float, gains: ControllerGains, s) -> float:
    """Closed-form time-gap error delta(s) for initial values at s = 0.

    Distinct roots: A*exp(r1*s) + B*exp(r2*s) with A, B from the initial
    conditions (Cramer's rule). Repeated root r: (A + B*s)*exp(r*s).
    Complex pair -p1/2 +- i*w: the real damped-oscillation form.
    """
    p1 = gains.p1
    if _is_repeated(gains):
        r = -p1 / 2.0
        b = delta_slope0 - r * delta0
        return (delta0 + b * s) * np.exp(r * s)
    disc = p1 * p1 - 4.0 * gains.p0
    if disc > 0:
        r1, r2 = characteristic_roots(gains)
        a = (r2 * delta0 - delta_slope0) / (r2 - r1)
        b = (delta_slope0 - r1 * delta0) / (r2 - r1)
        return a * np.exp(r1 * s) + b * np.exp(r2 * s)
    w = math.sqrt(-disc) / 2.0
    c = delta0
    d = (delta_slope0 + (p1 / 2.0) * delta0) / w
    return np.exp(-p1 / 2.0 * s) * (c * np.cos(w * s) + d * np.sin(w * s))


def delta_solution_slope(delta0: float, delta_slope0: float, gains: ControllerGains, s) -> float:
    """d(delta)/ds of the closed-form solution above."""
    p1 = gains.p1
    if _is_repeated(gains):
        r = -p1 / 2.0
        b = delta_slope0 - r * delta0
        return (b + r * (delta0 + b * s)) * np.exp(r * s)
    disc = p1 * p1 - 4.0 * gains.p0
    if disc > 0:
        r1, r2 = characteristic_roots(gains)
        a = (r2 * delta0 - delta_slope0) / (r2 - r1)
        b = (delta_slope0 - r1 * delta0) / (r2 - r1)
        return a * r1 * np.exp(r1 * s) + b * r2 * np.exp(r2 * s)
    w = math.sqrt(-disc) / 2.0
    sigma = -p1 / 2.0
    c = delta0
    d = (delta_slope0 - sigma * delta0) / w
    return np.exp(sigma * s) * (
        (sigma * c + w * d) * np.cos(w * s) + (sigma * d - w * c) * np.sin(w * s)
    )


def lead_error_solution(e0_initial: float, p: float, s) -> float:
    """Lead velocity error e0(s) = e0(0) * exp(-p*s) for s >= 0."""
    if p <= 0:
        raise ValueError("p must be > 0")
    return e0_initial * np.exp(-p * s)


def follower_error_induction(e0_at_s, a_list, b_list, roots, dtau_ds_list, s):
    """Velocity error of vehicle i by induction along the chain.

    e_i(s) = e0(s) + r1*exp(r1*s)*sum(A_j) + r2*exp(r2*s)*sum(B_j)
             + sum of the vehicles' desired time-gap slopes at s.

    a_list/b_list hold the per-vehicle solution coefficients of the time-gap
    errors (zero for vehicles started on-profile); dtau_ds_list holds
    dtau_j,des/ds evaluated at s, j = 1..i. Complex-conjugate roots with the
    conjugate coefficient convention yield a real value; the real part is
    returned.
    """
    r1, r2 = roots
    total = e0_at_s
    total += r1 * cmath.exp(r1 * s) * sum(a_list) + r2 * cmath.exp(r2 * s) * sum(b_list)
    total += sum(dtau_ds_list)
    return total.real if isinstance(total, complex) else float(total)
