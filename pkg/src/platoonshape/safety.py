"""Closed-form safety-region math relating velocity, spacing and time-gap.

The safe region is the set of (velocity, time-gap) pairs for which a vehicle
can come to a full stop behind an instantly stopped predecessor. Its boundary
is the convex curve tau = v/(2*a_min) + l/v; everything above the curve is
safe, everything below is not, for any control law.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

# Absolute tolerance for boundary comparisons, in seconds.
BOUNDARY_TOL = 1e-9


class InfeasibleTimeGapError(ValueError):
    """Requested time-gap lies below the minimum of the safety curve."""


@dataclass(frozen=True)
class SafetyParams:
    """Vehicle geometry and braking capability defining the safe region.

    vehicle_length_l: effective vehicle length [m]; conservatively includes
        the standstill spacing in front of the physical bumper.
    a_min: magnitude of the maximum deceleration [m/s^2], given as a
        positive number.
    """

    vehicle_length_l: float
    a_min: float

    def __post_init__(self):
        if self.vehicle_length_l <= 0:
            raise ValueError(f"vehicle_length_l must be > 0, got {self.vehicle_length_l}")
        if self.a_min <= 0:
            raise ValueError(f"a_min must be > 0, got {self.a_min}")

    @property
    def min_feasible_time_gap(self) -> float:
        """Global minimum of the safe time-gap curve, sqrt(2*l/a_min) [s]."""
        return math.sqrt(2.0 * self.vehicle_length_l / self.a_min)


@dataclass(frozen=True)
class OperatingPoint:
    """A (velocity [m/s], time-gap [s]) pair of a platoon flow."""

    velocity: float
    time_gap: float

    def __post_init__(self):
        if self.velocity <= 0:
            raise ValueError(f"velocity must be > 0, got {self.velocity}")
        if self.time_gap <= 0:
            raise ValueError(f"time_gap must be > 0, got {self.time_gap}")


class SafetyCheck(NamedTuple):
    safe: bool
    margin: float  # time_gap minus the boundary value; positive = safe


def min_safe_distance(v, params: SafetyParams):
    """Minimum stopping-safe gap [m] behind an instantly stopped leader at speed v.

    Accepts a scalar or an ndarray of velocities; v must be >= 0.
    """
    if np.any(np.asarray(v) < 0):
        raise ValueError("velocity must be >= 0")
    return v * v / (2.0 * params.a_min)


def safe_time_gap(v, params: SafetyParams):
    """Minimum safe time-gap [s] at velocity v [m/s] (the safety-curve boundary)."""
    if np.any(np.asarray(v) <= 0):
        raise ValueError("velocity must be > 0")
    return v / (2.0 * params.a_min) + params.vehicle_length_l / v


def velocity_for_time_gap(tau, params: SafetyParams):
    """Boundary velocity [m/s] for time-gap tau [s], taking the high-speed branch.

    Inverts safe_time_gap on [v*, inf): the larger root of the quadratic
    v^2 - 2*a_min*tau*v + 2*l*a_min = 0. The low-speed branch is rejected.

    Raises InfeasibleTimeGapError if tau < sqrt(2*l/a_min), where the
    discriminant turns negative.
    """
    a = params.a_min
    if np.any(np.asarray(tau) < params.min_feasible_time_gap - BOUNDARY_TOL):
        raise InfeasibleTimeGapError(
            f"time-gap below feasible minimum {params.min_feasible_time_gap:.6f} s"
        )
    q = np.asarray(tau, dtype=float) * a
    # rounding can push the discriminant a hair negative exactly on the boundary
    disc = np.maximum(q * q - 2.0 * params.vehicle_length_l * a, 0.0)
    root = q + np.sqrt(disc)
    return float(root) if np.ndim(tau) == 0 else root


def min_time_gap_point(params: SafetyParams) -> OperatingPoint:
    """Unique minimizer of the safety curve: (v*, tau_min) = (sqrt(2*l*a), sqrt(2*l/a))."""
    v_star = math.sqrt(2.0 * params.vehicle_length_l * params.a_min)
    return OperatingPoint(v_star, params.min_feasible_time_gap)


def is_safe(point: OperatingPoint, params: SafetyParams) -> SafetyCheck:
    """Check safe-region membership of an operating point.

    The margin is point.time_gap minus the boundary time-gap at
    point.velocity; the point counts as safe down to -BOUNDARY_TOL.
    """
    margin = point.time_gap - safe_time_gap(point.velocity, params)
    return SafetyCheck(margin >= -BOUNDARY_TOL, margin)
