"""Design of location-dependent time-gap and velocity profiles.

A shaping profile splits a platoon into sub-platoons of size two by driving
odd-indexed vehicles onto a smaller downstream time-gap while even-indexed
vehicles open up a correspondingly larger one. The transition is a tanh ramp

    T(s) = alpha + beta * tanh(gamma * (s - center_s))

which rises from 0 upstream to 2*alpha downstream, so

    tau_even(s) = tau0 + T(s),    tau_odd(s) = tau0 - T(s).

Odd vehicles ride the boundary of the safe region exactly; the even (and
lead) desired velocity follows from requiring that on-profile vehicles keep
their time-gap errors at zero, which gives

    v_des(s) = v_odd(s) / (1 + v_odd(s) * T'(s)).

The steepness gamma is the design freedom: larger gamma shapes the platoon
over a shorter stretch of road but demands harder braking, so it is chosen
by maximizing gamma subject to a deceleration bound.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .safety import InfeasibleTimeGapError, SafetyParams, velocity_for_time_gap


class InfeasibleTargetError(ValueError):
    """Final odd time-gap falls below the minimum of the safety curve."""


class DegenerateProfileError(ValueError):
    """Upstream and downstream time-gap targets coincide (nothing to shape)."""


class ProfileInconsistencyError(ValueError):
    """The desired-velocity denominator 1 + v_odd * T' is not positive."""


class OptimizationFailureError(RuntimeError):
    """No steepness value in the search bracket satisfies the constraints."""


class Parity(enum.Enum):
    """Vehicle-index parity; the lead vehicle (index 0) is even."""

    EVEN = "even"
    ODD = "odd"

    @classmethod
    def of_index(cls, index: int) -> "Parity":
        return cls.EVEN if index % 2 == 0 else cls.ODD

    @property
    def sign(self) -> float:
        """Sign of the transition term in tau_parity = tau0 + sign * T."""
        return 1.0 if self is Parity.EVEN else -1.0


@dataclass(frozen=True)
class ShapingProfile:
    """Parametric time-gap profile pair plus the safety params it was built for.

    Invariants enforced here are the structural ones (gamma > 0, alpha == beta);
    use design_profile for the fully validated construction. Direct construction
    with beta < 0 describes a gap-opening (speed-up) profile, for which the
    desired velocity can become inconsistent.
    """

    tau0: float
    alpha: float
    beta: float
    gamma: float
    center_s: float
    params: SafetyParams

    def __post_init__(self):
        if self.gamma <= 0:
            raise ValueError(f"gamma must be > 0, got {self.gamma}")
        if self.alpha != self.beta:
            raise ValueError("alpha and beta must coincide for a tanh ramp from 0")

    @property
    def tau_odd_end(self) -> float:
        """Downstream limit of the odd time-gap [s]."""
        return self.tau0 - self.alpha - self.beta

    @property
    def tau_even_end(self) -> float:
        """Downstream limit of the even time-gap [s]."""
        return self.tau0 + self.alpha + self.beta

    @property
    def max_transition_slope(self) -> float:
        """max_s |T'(s)| = beta * gamma, attained at center_s [s/m]."""
        return abs(self.beta) * self.gamma


class ProfileKinematics(NamedTuple):
    """All profile quantities at one location (scalars or arrays, like s)."""

    transition: np.ndarray        # T
    transition_d1: np.ndarray     # T'
    transition_d2: np.ndarray     # T''
    tau_odd: np.ndarray
    tau_even: np.ndarray
    v_odd: np.ndarray
    v_des: np.ndarray
    inv_v_des: np.ndarray         # 1/v_des = 1/v_odd + T'
    inv_v_des_d1: np.ndarray      # d(1/v_des)/ds


def design_profile(
    tau0: float,
    tau_odd_end: float,
    gamma: float,
    center_s: float,
    params: SafetyParams,
) -> ShapingProfile:
    """Build a shaping profile from upstream/downstream time-gap targets.

    Parameters
    ----------
    tau0 : upstream time-gap of every vehicle [s]
    tau_odd_end : downstream time-gap of odd vehicles [s]; must stay on or
        above the safety-curve minimum
    gamma : tanh steepness [1/m]
    center_s : location of the tanh inflection [m]
    params : safe-region parameters

    The ramp amplitude follows from the targets: alpha = beta =
    (tau0 - tau_odd_end) / 2.
    """
    if tau_odd_end < params.min_feasible_time_gap:
        raise InfeasibleTargetError(
            f"tau_odd_end={tau_odd_end} below feasible minimum "
            f"{params.min_feasible_time_gap:.6f} s"
        )
    if tau0 <= tau_odd_end:
        raise DegenerateProfileError(
            f"tau0={tau0} must exceed tau_odd_end={tau_odd_end}"
        )
    half = (tau0 - tau_odd_end) / 2.0
    return ShapingProfile(tau0, half, half, gamma, center_s, params)


def constant_profile(tau0: float, params: SafetyParams) -> ShapingProfile:
    """No-shaping baseline with T identically zero (both parities at tau0).

    Kept out of design_profile on purpose: a zero-amplitude ramp is rejected
    there as degenerate, but it is the natural regression baseline.
    """
    if tau0 < params.min_feasible_time_gap:
        raise InfeasibleTargetError(
            f"tau0={tau0} below feasible minimum {params.min_feasible_time_gap:.6f} s"
        )
    return ShapingProfile(tau0, 0.0, 0.0, 1.0, 0.0, params)


def transition_at(profile: ShapingProfile, s):
    """Evaluate (T, T', T'') at s; s may be a scalar or an ndarray."""
    z = profile.gamma * (np.asarray(s, dtype=float) - profile.center_s)
    th = np.tanh(z)
    sech2 = 1.0 - th * th
    t_val = profile.alpha + profile.beta * th
    d1 = profile.beta * profile.gamma * sech2
    d2 = -2.0 * profile.beta * profile.gamma * profile.gamma * sech2 * th
    return t_val, d1, d2


def time_gap_at(profile: ShapingProfile, parity: Parity, s):
    """Desired time-gap and its first two location derivatives for one parity.

    Returns (tau [s], dtau/ds [s/m], d2tau/ds2 [s/m^2]).
    """
    t_val, d1, d2 = transition_at(profile, s)
    sgn = parity.sign
    return profile.tau0 + sgn * t_val, sgn * d1, sgn * d2


def kinematics_at(profile: ShapingProfile, s) -> ProfileKinematics:
    """Evaluate every profile quantity needed by the controller at s.

    Odd vehicles ride the safety boundary, so their velocity is the boundary
    velocity at tau_odd(s). The even/lead desired velocity and the analytic
    derivative of its reciprocal (the lead feed-forward term) come from the
    zero-error flow condition.
    """
    t_val, d1, d2 = transition_at(profile, s)
    tau_odd = profile.tau0 - t_val
    tau_even = profile.tau0 + t_val

    a = profile.params.a_min
    if np.any(tau_odd < profile.params.min_feasible_time_gap - 1e-9):
        raise InfeasibleTimeGapError(
            f"odd time-gap {np.min(tau_odd):.6f} s dips below feasible minimum "
            f"{profile.params.min_feasible_time_gap:.6f} s"
        )
    q = a * tau_odd
    root = np.sqrt(np.maximum(q * q - 2.0 * profile.params.vehicle_length_l * a, 0.0))
    v_odd = q + root
    # d(v_odd)/ds via the chain rule; d(tau_odd)/ds = -T'
    dv_odd = -a * (1.0 + q / root) * d1

    denom = 1.0 + v_odd * d1
    if np.any(denom <= 0):
        raise ProfileInconsistencyError(
            "1 + v_odd * T' is not positive; desired velocity undefined"
        )
    inv_v_des = 1.0 / v_odd + d1
    v_des = 1.0 / inv_v_des
    inv_v_des_d1 = -dv_odd / (v_odd * v_odd) + d2

    return ProfileKinematics(
        t_val, d1, d2, tau_odd, tau_even, v_odd, v_des, inv_v_des, inv_v_des_d1
    )


def odd_velocity(profile: ShapingProfile, s):
    """Velocity of odd vehicles [m/s]: boundary velocity at tau_odd(s)."""
    t_val, _, _ = transition_at(profile, s)
    return velocity_for_time_gap(profile.tau0 - t_val, profile.params)


def desired_velocity(profile: ShapingProfile, s):
    """Desired velocity of even vehicles and the lead [m/s]."""
    return kinematics_at(profile, s).v_des


def acceleration_profiles(profile: ShapingProfile, s_grid):
    """Accelerations a = v * dv/ds [m/s^2] of both parities on a location grid.

    dv/ds uses central differences on the grid interior and one-sided
    differences at the two ends; the grid must be strictly increasing and
    hold at least 3 points.
    """
    s = np.asarray(s_grid, dtype=float)
    if s.ndim != 1 or s.size < 3:
        raise ValueError("grid must be one-dimensional with at least 3 points")
    if np.any(np.diff(s) <= 0):
        raise ValueError("grid must be strictly increasing")
    kin = kinematics_at(profile, s)
    a_odd = kin.v_odd * np.gradient(kin.v_odd, s)
    a_even = kin.v_des * np.gradient(kin.v_des, s)
    return a_odd, a_even


def _constraint_grid(gamma: float, center_s: float):
    # tanh is within 3e-7 of its limit beyond |gamma*(s-c)| = 8, so sampling
    # that far out captures the whole transition.
    half = 8.0 / gamma
    step = min(0.1, 0.01 / gamma)
    n = int(np.ceil(2.0 * half / step)) + 1
    return center_s - half + step * np.arange(n)


def _decel_feasible(
    tau0: float,
    tau_odd_end: float,
    gamma: float,
    center_s: float,
    params: SafetyParams,
    bound: float,
) -> bool:
    profile = design_profile(tau0, tau_odd_end, gamma, center_s, params)
    s = _constraint_grid(gamma, center_s)
    a_odd, a_even = acceleration_profiles(profile, s)
    # 1e-6 slack absorbs the discretization error of the sampled gradient
    return min(a_odd.min(), a_even.min()) >= -bound - 1e-6


def optimize_gamma(
    tau0: float,
    tau_odd_end: float,
    params: SafetyParams,
    tol: float = 1e-4,
    decel_limit: float | None = None,
) -> float:
    """Largest tanh steepness [1/m] whose profile respects the deceleration bound.

    Maximizes gamma subject to min_s a_odd(s) >= -bound and
    min_s a_even(s) >= -bound, where bound defaults to params.a_min.
    decel_limit overrides the bound when the comfort limit differs from the
    emergency-braking capability that shapes the safety region.

    Feasibility is monotone in gamma (gentler ramps brake less), so a plain
    bisection over the bracket (1e-4, 10] converges; the result is
    deterministic for a fixed tol and sampling rule.

    Parameters
    ----------
    tau0, tau_odd_end : time-gap targets [s], tau0 > tau_odd_end >= curve minimum
    params : safe-region parameters
    tol : bracket width at which bisection stops [1/m]
    decel_limit : optional deceleration bound magnitude [m/s^2]
    """
    if tol <= 0:
        raise ValueError("tol must be > 0")
    bound = params.a_min if decel_limit is None else decel_limit
    center_s = 0.0  # feasibility is translation invariant

    lo, hi = 1e-4, 10.0
    if _decel_feasible(tau0, tau_odd_end, hi, center_s, params, bound):
        return hi
    if not _decel_feasible(tau0, tau_odd_end, lo, center_s, params, bound):
        raise OptimizationFailureError(
            f"no feasible gamma in ({lo}, {hi}] under bound {bound} m/s^2"
        )
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _decel_feasible(tau0, tau_odd_end, mid, center_s, params, bound):
            lo = mid
        else:
            hi = mid
    return lo
