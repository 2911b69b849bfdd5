"""
The safe operating region
=========================

Walk the closed-form safety math: stopping distances, the safe time-gap
curve, its minimum, and membership checks for a few operating points.
"""

import numpy as np

import platoonshape as ps

# A 6 m effective vehicle length (body plus standstill buffer) and 4 m/s^2
# of usable braking.
params = ps.SafetyParams(vehicle_length_l=6.0, a_min=4.0)

print("Stopping-safe gap behind an instantly frozen leader:")
for v in (5.0, 10.0, 20.0, 30.0):
    print(f"  v = {v:5.1f} m/s  ->  d_min = {ps.min_safe_distance(v, params):7.2f} m")

# The same constraint in Eulerian terms: the minimum time-gap at which a
# follower passing a fixed point is safe. The curve is convex in velocity.
print("\nSafe time-gap curve (time between passages of a fixed point):")
for v in (5.0, 7.0, 10.0, 15.0, 20.0, 30.0):
    print(f"  v = {v:5.1f} m/s  ->  tau >= {ps.safe_time_gap(v, params):6.3f} s")

point = ps.min_time_gap_point(params)
print(f"\nCurve minimum: tau = {point.time_gap:.4f} s at v = {point.velocity:.4f} m/s")
print("No flow can run a smaller time-gap than this, at any speed.")

# Inverting the curve picks the high-speed branch: the velocity at which a
# platoon with the given time-gap rides the boundary.
for tau in (2.6, 2.0, 1.74):
    v = ps.velocity_for_time_gap(tau, params)
    print(f"Boundary velocity for tau = {tau:4.2f} s: {v:.3f} m/s")

# Membership checks report a signed margin (positive = inside the region).
print("\nOperating-point checks:")
for v, tau in [(18.156, 2.6), (18.156, 2.0), (10.0, 1.9)]:
    safe, margin = ps.is_safe(ps.OperatingPoint(v, tau), params)
    verdict = "safe" if safe else "UNSAFE"
    print(f"  (v={v:6.3f}, tau={tau}): {verdict}, margin {margin:+.4f} s")

# Sample the whole curve, e.g. for plotting.
v_grid = np.linspace(3.0, 30.0, 10)
curve = ps.safe_time_gap(v_grid, params)
print("\nSampled curve:", np.round(curve, 3))
