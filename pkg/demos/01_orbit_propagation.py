"""
Orbit propagation: two-body closure and the J2 nodal drift
==========================================================

The constellation flies sun-synchronous orbits near 620 km.  This script
checks the two facts the rest of the library leans on: a two-body orbit
closes on itself after one period, and with J2 switched on the node
drifts eastward at roughly the sun-synchronous rate of 0.9856 deg/day.
"""

import math

import numpy as np

from stormcover.harness import DEFAULT_SATELLITES
from stormcover.orbits import (
    EARTH,
    eci_positions,
    j2_raan_rate,
    orbital_period,
    propagate,
)

sc = DEFAULT_SATELLITES[3]  # HUANJING-1A
coe = sc.elements
period = orbital_period(coe.semi_major_axis)
print(f"{sc.name}: a = {coe.semi_major_axis:.2f} km, "
      f"i = {math.degrees(coe.inclination):.2f} deg, "
      f"period = {period / 60.0:.2f} min")

# One full revolution with J2 off.  The returned elements should match the
# departure elements; the residual below is pure Kepler-solver noise.
after = propagate(coe, period, include_j2=False)
dnu = (after.true_anomaly - coe.true_anomaly + math.pi) % (2.0 * math.pi) - math.pi
print(f"two-body closure error after one period: {abs(dnu):.2e} rad")

# J2 drift rates.  A sun-synchronous node keeps pace with the mean Sun.
raan_rate = math.degrees(j2_raan_rate(coe)) * 86400.0
print(f"J2 nodal drift: {raan_rate:+.4f} deg/day (sun-synchronous is +0.9856)")

# Sample the first period and look at the altitude band.
epochs = np.linspace(0.0, period, 200)
positions = eci_positions(coe, epochs)
altitude = np.linalg.norm(positions, axis=1) - EARTH.radius_km
print(f"altitude over one revolution: {altitude.min():.1f} .. {altitude.max():.1f} km")

# The same drift, across the whole constellation.
print("\nnodal drift by satellite:")
for member in DEFAULT_SATELLITES:
    rate = math.degrees(j2_raan_rate(member.elements)) * 86400.0
    print(f"  {member.name:<12s} {rate:+.4f} deg/day")
