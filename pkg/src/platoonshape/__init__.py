"""Traffic shaping of connected automated vehicle platoons.

Designs safety-constrained time-gap/velocity profiles as functions of
roadway location, runs feedback-linearized controllers in the space domain,
and verifies plant stability, string stability, safe-region membership and
merge feasibility.
"""

from .controller import (
    V_FLOOR,
    ControllerGains,
    ErrorState,
    StallError,
    VehicleState,
    characteristic_roots,
    delta_solution,
    delta_solution_slope,
    follower_control,
    follower_error_induction,
    lead_control,
    lead_error_solution,
    time_gap_error,
    velocity_error,
)
from .profiles import (
    DegenerateProfileError,
    InfeasibleTargetError,
    OptimizationFailureError,
    Parity,
    ProfileInconsistencyError,
    ShapingProfile,
    acceleration_profiles,
    constant_profile,
    design_profile,
    desired_velocity,
    kinematics_at,
    odd_velocity,
    optimize_gamma,
    time_gap_at,
    transition_at,
)
from .safety import (
    InfeasibleTimeGapError,
    OperatingPoint,
    SafetyParams,
    is_safe,
    min_safe_distance,
    min_time_gap_point,
    safe_time_gap,
    velocity_for_time_gap,
)
from .sim import (
    CONVERGENCE_TOL,
    LocationGrid,
    MergeReport,
    PlatoonTrace,
    ScenarioConfig,
    SimulationAbort,
    VehicleTrace,
    audit_merge,
    default_grid,
    read_trace_csv,
    reconstruct_time_domain,
    simulate_platoon,
    write_trace_csv,
)

__version__ = "0.1.0"

__all__ = [
    "CONVERGENCE_TOL",
    "ControllerGains",
    "DegenerateProfileError",
    "ErrorState",
    "InfeasibleTargetError",
    "InfeasibleTimeGapError",
    "LocationGrid",
    "MergeReport",
    "OperatingPoint",
    "OptimizationFailureError",
    "Parity",
    "PlatoonTrace",
    "ProfileInconsistencyError",
    "SafetyParams",
    "ScenarioConfig",
    "ShapingProfile",
    "SimulationAbort",
    "StallError",
    "V_FLOOR",
    "VehicleState",
    "VehicleTrace",
    "acceleration_profiles",
    "audit_merge",
    "characteristic_roots",
    "constant_profile",
    "default_grid",
    "delta_solution",
    "delta_solution_slope",
    "design_profile",
    "desired_velocity",
    "follower_control",
    "follower_error_induction",
    "is_safe",
    "kinematics_at",
    "lead_control",
    "lead_error_solution",
    "min_safe_distance",
    "min_time_gap_point",
    "odd_velocity",
    "optimize_gamma",
    "read_trace_csv",
    "reconstruct_time_domain",
    "safe_time_gap",
    "simulate_platoon",
    "time_gap_at",
    "time_gap_error",
    "transition_at",
    "velocity_error",
    "velocity_for_time_gap",
    "write_trace_csv",
]
