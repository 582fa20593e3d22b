"""
Impulsive maneuver pricing
==========================

Every reconfiguration edge is priced from closed forms for circular
orbits: phasing ellipses for along-track shifts, single-impulse plane
rotations for inclination and RAAN, and combinations of the two.  This
script walks through the individual formulas, the strategy dispatcher,
and the budget calibration that sizes the slot grids.
"""

import math

from stormcover.harness import DEFAULT_SATELLITES
from stormcover.maneuvers import (
    GridMode,
    SlotGridSpec,
    calibrate_plane_spans,
    combined_plane_cost,
    generate_slot_grid,
    inclination_change_cost,
    phasing_cost,
    raan_change_cost,
    transfer_cost,
)

DEG = math.pi / 180.0

sc = DEFAULT_SATELLITES[2]  # HUANJING-1B
orbit = sc.elements
print(f"pricing maneuvers for {sc.name} (a = {orbit.semi_major_axis:.2f} km)\n")

# Phasing: drift on a slightly different ellipse, then recircularize.
# More revolutions mean a smaller ellipse and cheaper burns but a longer
# wait; the planner takes whatever fits under max_revs.
print("30 deg phase shift, by allowed drift revolutions:")
for revs in (1, 2, 3, 4, 6):
    cost = phasing_cost(orbit, 30.0 * DEG, max_revs=revs)
    print(f"  max_revs {revs}: {cost.delta_v:.4f} km/s, "
          f"wait {cost.transfer_time / 3600.0:6.2f} h")

# Plane rotations are brutally expensive by comparison.
one_deg_incl = inclination_change_cost(orbit, 1.0 * DEG)
one_deg_raan = raan_change_cost(orbit, 1.0 * DEG)
both = combined_plane_cost(orbit, 1.0 * DEG, 1.0 * DEG)
print(f"\n1 deg inclination change: {one_deg_incl.delta_v:.4f} km/s")
print(f"1 deg RAAN change:        {one_deg_raan.delta_v:.4f} km/s")
print(f"both at once (one burn):  {both.delta_v:.4f} km/s")

# The 2 km/s budget bounds how far a slot grid can reach.
spans = calibrate_plane_spans(orbit, 2.0)
print(f"\nplane spans reachable on 2 km/s: "
      f"inclination +/-{math.degrees(spans[0]):.3f} deg, "
      f"RAAN +/-{math.degrees(spans[1]):.3f} deg")

# An unrestricted grid: 5 planes (center, two inclination offsets, two
# RAAN offsets), each carrying a 3-phase comb.  transfer_cost picks the
# cheapest strategy for each slot from the current orbit.
slots = generate_slot_grid(orbit, SlotGridSpec(3, 3), 2.0, GridMode.UNRESTRICTED)
print(f"\n{len(slots)} candidate slots; cost of reaching each from the initial orbit:")
print("  slot   delta-v  strategy")
for j, slot in enumerate(slots):
    cost = transfer_cost(orbit, slot)
    print(f"  {j:4d}  {cost.delta_v:7.4f}  {cost.strategy.value}")
