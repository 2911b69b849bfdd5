"""
Designing time-gap and velocity profiles
========================================

Shape a platoon into sub-platoons of two: odd vehicles tighten onto the
safety boundary while even vehicles open a merge-sized gap, all as smooth
functions of location. The ramp steepness is then pushed as high as the
braking limit allows.
"""

import numpy as np

import platoonshape as ps
from platoonshape.profiles import Parity

params = ps.SafetyParams(vehicle_length_l=6.0, a_min=4.0)

# Targets: everyone starts at a 2.6 s gap; odd vehicles end at 1.74 s
# (the tightest gap the downstream merged flow can support).
tau0, tau_end = 2.6, 1.74

# How fast can the transition be? Maximize the tanh steepness subject to
# nobody braking harder than 4 m/s^2.
gamma = ps.optimize_gamma(tau0, tau_end, params, tol=1e-4)
print(f"steepest feasible ramp: gamma = {gamma:.4f} 1/m "
      f"(transition spans roughly {20 / gamma:.0f} m of road)")

profile = ps.design_profile(tau0, tau_end, gamma, center_s=0.0, params=params)
print(f"ramp amplitudes alpha = beta = {profile.alpha}")
print(f"even vehicles end at {profile.tau_even_end:.2f} s "
      f"(room for one merging vehicle each)")

# The desired gaps and velocities along the road, per parity.
s = np.linspace(-150.0, 150.0, 7)
print("\n   s [m]   tau_odd   tau_even   v_odd    v_des")
for si in s:
    tau_o = ps.time_gap_at(profile, Parity.ODD, si)[0]
    tau_e = ps.time_gap_at(profile, Parity.EVEN, si)[0]
    v_o = ps.odd_velocity(profile, si)
    v_d = ps.desired_velocity(profile, si)
    print(f"  {si:6.0f}   {tau_o:7.3f}   {tau_e:8.3f}  {v_o:6.2f}   {v_d:6.2f}")

# Deceleration demand of the design, via a = v * dv/ds.
grid = np.arange(-8 / gamma, 8 / gamma, 0.1)
a_odd, a_even = ps.acceleration_profiles(profile, grid)
print(f"\npeak decelerations: odd {a_odd.min():.3f}, even {a_even.min():.3f} m/s^2")
print("both stay above the -4 m/s^2 limit by construction")

# A steeper ramp would not:
steep = ps.design_profile(tau0, tau_end, 0.2, 0.0, params)
a_odd, a_even = ps.acceleration_profiles(steep, np.arange(-40, 40, 0.05))
print(f"gamma = 0.2 would demand {min(a_odd.min(), a_even.min()):.1f} m/s^2")
