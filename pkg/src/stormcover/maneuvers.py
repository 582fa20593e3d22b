"""Impulsive transfer pricing, candidate slot grids, and the cost matrix.

All costs assume near-circular orbits at a shared altitude: phasing is a
two-impulse resize-and-return ellipse, plane changes are single impulses at
a node, and combinations price the phasing leg after the plane change.
Slot grids put candidate orbits on equally spaced phase offsets and, in the
unrestricted mode, on inclination and RAAN offsets calibrated so that the
most distant plane costs exactly the per-satellite fuel budget to reach in
one maneuver.
"""

from __future__ import annotations

import csv
import enum
import math
import warnings
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .orbits import (
    EARTH,
    ClassicalOrbitalElements,
    EarthModel,
    TimeGrid,
    mean_motion,
    propagate,
)

__all__ = [
    "TransferStrategy",
    "TransferCost",
    "GridMode",
    "SlotGridSpec",
    "CostMatrix",
    "phasing_cost",
    "inclination_change_cost",
    "raan_change_cost",
    "combined_plane_cost",
    "transfer_cost",
    "calibrate_plane_spans",
    "generate_slot_grid",
    "build_cost_matrix",
]

TWO_PI = 2.0 * math.pi

# Orbits are treated as interchangeable when angles agree to this tolerance.
_ANGLE_TOL = 1e-12
_SMA_TOL_KM = 1e-6
_MAX_ECC = 0.01

# Phasing ellipses must keep their periapsis this far above the surface.
_MIN_PERIAPSIS_CLEARANCE_KM = 100.0


class TransferStrategy(enum.Enum):
    """The stay option plus the seven priced transfer types."""

    STAY = "stay"
    PHASE = "phase"
    INCLINATION = "inclination"
    RAAN = "raan"
    PLANE = "plane"
    INCLINATION_PHASE = "inclination+phase"
    RAAN_PHASE = "raan+phase"
    PLANE_PHASE = "plane+phase"


# Preference order on cost ties: simpler maneuvers win.
_STRATEGY_ORDER = list(TransferStrategy)


@dataclass(frozen=True)
class TransferCost:
    """Priced transfer: Δv in km/s, the strategy, and the wait time in s.

    An infinite delta_v marks an edge excluded by the periapsis guard.
    """

    delta_v: float
    strategy: TransferStrategy
    transfer_time: float

    def __post_init__(self) -> None:
        if math.isnan(self.delta_v) or self.delta_v < 0.0:
            raise ValueError(f"delta_v must be non-negative, got {self.delta_v!r}")


class GridMode(enum.Enum):
    PHASING_ONLY = "phasing-only"
    UNRESTRICTED = "unrestricted"


@dataclass(frozen=True)
class SlotGridSpec:
    """Shape of a candidate slot grid.

    Attributes:
        num_phases: phase offsets per plane (the grid spacing is 2 pi over
            this count).
        num_plane_axis: planes along each of the inclination and RAAN axes,
            center included; the two axes share the center plane, so the
            unrestricted grid holds (2*num_plane_axis - 1) planes.  Must be
            odd so offsets come in symmetric pairs.
        incl_span, raan_span: extreme plane offsets in radians; None means
            "derive from the fuel budget at generation time".
        include_initial: keep the initial orbit as slot 0.  When False the
            phase comb is shifted by half a spacing, which is only useful
            for grid-sensitivity experiments.
    """

    num_phases: int
    num_plane_axis: int = 1
    incl_span: Optional[float] = None
    raan_span: Optional[float] = None
    include_initial: bool = True

    def __post_init__(self) -> None:
        if self.num_phases < 1:
            raise ValueError("num_phases must be at least 1")
        if self.num_plane_axis < 1:
            raise ValueError("num_plane_axis must be at least 1")

    def num_slots(self, mode: "GridMode") -> int:
        if mode is GridMode.PHASING_ONLY:
            return self.num_phases
        return self.num_phases * (2 * self.num_plane_axis - 1)


def _circular_speed(a: float, earth: EarthModel) -> float:
    return math.sqrt(earth.mu_km3_s2 / a)


def _require_near_circular(orbit: ClassicalOrbitalElements) -> None:
    if orbit.eccentricity >= _MAX_ECC:
        raise ValueError(
            f"cost formulas assume near-circular orbits (e < {_MAX_ECC}), got e={orbit.eccentricity}"
        )


def phasing_cost(
    orbit: ClassicalOrbitalElements,
    phase_offset: float,
    max_revs: int = 4,
    earth: EarthModel = EARTH,
) -> TransferCost:
    """Cheapest two-impulse phasing rendezvous over the allowed rev counts.

    The chaser enters an ellipse whose period makes it return to the
    departure point, after k_tfr transfer revolutions, exactly when the
    target slot arrives there after k_tgt revolutions plus the phase
    offset.  Rev counts run independently over 1..max_revs; combinations
    whose ellipse would dip below a 100 km surface clearance are discarded.

    Args:
        orbit: departure orbit (sets the radius and mean motion).
        phase_offset: how far the target slot trails, rad; wrapped into
            [0, 2 pi).
        max_revs: largest rev count for both the target and the transfer.

    Returns:
        TransferCost with the STAY strategy and zero cost for a zero
        offset, the PHASE strategy otherwise; +inf if every rev pair is
        excluded by the clearance guard.
    """
    _require_near_circular(orbit)
    if max_revs < 1:
        raise ValueError("max_revs must be at least 1")
    dphi = math.fmod(phase_offset, TWO_PI)
    if dphi < 0.0:
        dphi += TWO_PI
    if dphi == 0.0:
        return TransferCost(0.0, TransferStrategy.STAY, 0.0)

    a = orbit.semi_major_axis
    n = mean_motion(a, earth)
    v_circ = _circular_speed(a, earth)
    mu = earth.mu_km3_s2
    floor_radius = earth.radius_km + _MIN_PERIAPSIS_CLEARANCE_KM
    best_dv = math.inf
    best_time = math.inf
    for k_tgt in range(1, max_revs + 1):
        t_phase = (TWO_PI * k_tgt + dphi) / n
        for k_tfr in range(1, max_revs + 1):
            a_phase = mu ** (1.0 / 3.0) * (t_phase / (TWO_PI * k_tfr)) ** (2.0 / 3.0)
            if a_phase < a and 2.0 * a_phase - a < floor_radius:
                continue
            dv = 2.0 * abs(math.sqrt(mu * (2.0 / a - 1.0 / a_phase)) - v_circ)
            if dv < best_dv:
                best_dv = dv
                best_time = t_phase
    return TransferCost(best_dv, TransferStrategy.PHASE, best_time)


def inclination_change_cost(
    orbit: ClassicalOrbitalElements, di: float, earth: EarthModel = EARTH
) -> TransferCost:
    """Single-impulse inclination change at a node: 2 v sin(|di| / 2)."""
    _require_near_circular(orbit)
    v = _circular_speed(orbit.semi_major_axis, earth)
    dv = 2.0 * v * math.sin(abs(di) / 2.0)
    return TransferCost(dv, TransferStrategy.INCLINATION, 0.0)


def raan_change_cost(
    orbit: ClassicalOrbitalElements, draan: float, earth: EarthModel = EARTH
) -> TransferCost:
    """Single-impulse RAAN change at constant inclination.

    The rotation angle theta between the two orbit planes satisfies
    cos(theta) = cos^2(i) + sin^2(i) cos(dO).  An equatorial orbit has no
    node to move, so the cost degenerates to zero with a warning.
    """
    _require_near_circular(orbit)
    i = orbit.inclination
    if abs(math.sin(i)) < 1e-12 and abs(draan) > _ANGLE_TOL:
        warnings.warn("RAAN change on an equatorial orbit is undefined; costing 0", stacklevel=2)
        return TransferCost(0.0, TransferStrategy.RAAN, 0.0)
    # 1 - cos(theta) collapses to sin^2(i) (1 - cos(dO)), so the half-angle
    # sine is |sin i sin(dO/2)| exactly; evaluating it this way avoids the
    # arccos precision cliff near zero offsets.
    sin_half = abs(math.sin(i) * math.sin(draan / 2.0))
    v = _circular_speed(orbit.semi_major_axis, earth)
    return TransferCost(2.0 * v * sin_half, TransferStrategy.RAAN, 0.0)


def combined_plane_cost(
    orbit: ClassicalOrbitalElements, di: float, draan: float, earth: EarthModel = EARTH
) -> TransferCost:
    """Single impulse rotating the plane through both offsets at once.

    cos(theta) = cos(i1) cos(i2) + sin(i1) sin(i2) cos(dO), i2 = i1 + di.
    """
    _require_near_circular(orbit)
    i1 = orbit.inclination
    i2 = i1 + di
    # Same half-angle rearrangement as the RAAN case:
    # 1 - cos(theta) = 2 sin^2(di/2) + 2 sin(i1) sin(i2) sin^2(dO/2),
    # which degenerates exactly to the single-offset formulas.
    radicand = math.sin(di / 2.0) ** 2 + math.sin(i1) * math.sin(i2) * math.sin(draan / 2.0) ** 2
    sin_half = math.sqrt(min(1.0, max(0.0, radicand)))
    v = _circular_speed(orbit.semi_major_axis, earth)
    return TransferCost(2.0 * v * sin_half, TransferStrategy.PLANE, 0.0)


def _wrap_signed(angle: float) -> float:
    """Wrap to (-pi, pi]."""
    wrapped = math.fmod(angle, TWO_PI)
    if wrapped > math.pi:
        wrapped -= TWO_PI
    elif wrapped <= -math.pi:
        wrapped += TWO_PI
    return wrapped


def transfer_cost(
    from_orbit: ClassicalOrbitalElements,
    to_orbit: ClassicalOrbitalElements,
    max_revs: int = 4,
    earth: EarthModel = EARTH,
) -> TransferCost:
    """Cheapest strategy moving between two slots at the same altitude.

    Offsets are read off the element differences at the caller's common
    epoch: the phase offset is how far the target slot trails the chaser
    in argument of latitude, because the phasing ellipse returns the
    chaser to its own departure phase.  Every strategy whose legs exactly
    cover the needed changes is priced; the cheapest wins, with simpler
    strategies preferred on exact ties.

    Raises:
        ValueError: when the semi-major axes differ (altitude transfers
            are out of scope).
    """
    _require_near_circular(from_orbit)
    _require_near_circular(to_orbit)
    a = from_orbit.semi_major_axis
    if abs(a - to_orbit.semi_major_axis) > _SMA_TOL_KM:
        raise ValueError(
            f"transfer between different altitudes ({a} vs {to_orbit.semi_major_axis} km) is unsupported"
        )
    di = to_orbit.inclination - from_orbit.inclination
    draan = _wrap_signed(to_orbit.raan - from_orbit.raan)
    dphi = math.fmod(from_orbit.argument_of_latitude - to_orbit.argument_of_latitude, TWO_PI)
    if dphi < 0.0:
        dphi += TWO_PI
    has_i = abs(di) > _ANGLE_TOL
    has_o = abs(draan) > _ANGLE_TOL
    has_p = _ANGLE_TOL < dphi < TWO_PI - _ANGLE_TOL

    candidates: List[TransferCost] = []
    if not (has_i or has_o or has_p):
        candidates.append(TransferCost(0.0, TransferStrategy.STAY, 0.0))
    if has_p and not (has_i or has_o):
        candidates.append(phasing_cost(from_orbit, dphi, max_revs, earth))
    if has_i and not (has_o or has_p):
        candidates.append(inclination_change_cost(from_orbit, di, earth))
    if has_o and not (has_i or has_p):
        candidates.append(raan_change_cost(from_orbit, draan, earth))
    if (has_i or has_o) and not has_p:
        candidates.append(combined_plane_cost(from_orbit, di, draan, earth))
    if has_p and (has_i or has_o):
        phase_leg = phasing_cost(from_orbit, dphi, max_revs, earth)
        if has_i and not has_o:
            plane_leg = inclination_change_cost(from_orbit, di, earth)
            strategy = TransferStrategy.INCLINATION_PHASE
            candidates.append(
                TransferCost(plane_leg.delta_v + phase_leg.delta_v, strategy, phase_leg.transfer_time)
            )
        if has_o and not has_i:
            plane_leg = raan_change_cost(from_orbit, draan, earth)
            candidates.append(
                TransferCost(
                    plane_leg.delta_v + phase_leg.delta_v,
                    TransferStrategy.RAAN_PHASE,
                    phase_leg.transfer_time,
                )
            )
        plane_leg = combined_plane_cost(from_orbit, di, draan, earth)
        candidates.append(
            TransferCost(
                plane_leg.delta_v + phase_leg.delta_v,
                TransferStrategy.PLANE_PHASE,
                phase_leg.transfer_time,
            )
        )
    return min(candidates, key=lambda c: (c.delta_v, _STRATEGY_ORDER.index(c.strategy)))


def calibrate_plane_spans(
    initial: ClassicalOrbitalElements, budget: float, earth: EarthModel = EARTH
) -> Tuple[float, float]:
    """Extreme plane offsets whose single-maneuver cost equals the budget.

    Inverts the inclination formula directly; the RAAN span then solves
    the constant-inclination rotation formula for the same total angle.

    Raises:
        ValueError: if the budget exceeds a full plane reversal, or the
            orbit is too close to equatorial for any RAAN offset to cost
            that much.
    """
    v = _circular_speed(initial.semi_major_axis, earth)
    ratio = budget / (2.0 * v)
    if ratio > 1.0:
        raise ValueError(f"budget {budget} km/s exceeds a plane reversal at this altitude")
    theta_max = 2.0 * math.asin(ratio)
    incl_span = theta_max
    i = initial.inclination
    si2 = math.sin(i) ** 2
    if si2 < 1e-12:
        raise ValueError("cannot size a RAAN span on an equatorial orbit")
    cos_draan = (math.cos(theta_max) - math.cos(i) ** 2) / si2
    if cos_draan < -1.0:
        raise ValueError("budget exceeds the largest possible RAAN rotation at this inclination")
    raan_span = math.acos(min(1.0, cos_draan))
    return incl_span, raan_span


def generate_slot_grid(
    initial: ClassicalOrbitalElements,
    spec: SlotGridSpec,
    budget: float,
    mode: GridMode,
    earth: EarthModel = EARTH,
) -> List[ClassicalOrbitalElements]:
    """Candidate slots around an initial orbit.

    Phasing-only mode returns num_phases slots spaced equally in phase on
    the initial plane.  Unrestricted mode adds (num_plane_axis - 1)
    inclination-offset planes and as many RAAN-offset planes, graded
    symmetrically out to spans that cost exactly the budget to reach in a
    single direct maneuver, each plane carrying the full phase comb.

    Slot 0 is the initial orbit itself (when include_initial); within a
    plane, phases ascend; planes are ordered center, inclination axis from
    most negative to most positive offset, then the RAAN axis the same
    way.  Slot index = plane_index * num_phases + phase_index.
    """
    n_phase = spec.num_phases
    shift = 0.0 if spec.include_initial else math.pi / n_phase
    phase_offsets = [shift + TWO_PI * q / n_phase for q in range(n_phase)]

    def plane_slots(di: float, draan: float) -> List[ClassicalOrbitalElements]:
        return [
            replace(
                initial,
                inclination=initial.inclination + di,
                raan=(initial.raan + draan) % TWO_PI,
                true_anomaly=(initial.true_anomaly + off) % TWO_PI,
            )
            for off in phase_offsets
        ]

    if mode is GridMode.PHASING_ONLY:
        return plane_slots(0.0, 0.0)

    if spec.num_plane_axis % 2 == 0:
        raise ValueError(
            "num_plane_axis must be odd so plane offsets come in symmetric +/- pairs"
        )
    if spec.incl_span is None or spec.raan_span is None:
        incl_span, raan_span = calibrate_plane_spans(initial, budget, earth)
        incl_span = spec.incl_span if spec.incl_span is not None else incl_span
        raan_span = spec.raan_span if spec.raan_span is not None else raan_span
    else:
        incl_span, raan_span = spec.incl_span, spec.raan_span

    slots = plane_slots(0.0, 0.0)
    half = (spec.num_plane_axis - 1) // 2
    if half:
        fractions = [-q / half for q in range(half, 0, -1)] + [q / half for q in range(1, half + 1)]
        for frac in fractions:
            slots.extend(plane_slots(frac * incl_span, 0.0))
        for frac in fractions:
            slots.extend(plane_slots(0.0, frac * raan_span))
    return slots


@dataclass(frozen=True)
class CostMatrix:
    """Per-stage transfer costs c[s][k][i][j] with the per-satellite budget.

    stages[s] is a (K, J_prev, J) array of Δv in km/s for the maneuver at
    the start of stage s; stage 0 departs from the single initial orbit,
    so its from-axis has length 1.  strategy_codes mirrors the shape with
    indices into TransferStrategy.
    """

    stages: Tuple[np.ndarray, ...]
    budget: np.ndarray
    strategy_codes: Tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        if len(self.stages) != len(self.strategy_codes):
            raise ValueError("cost and strategy arrays must pair up per stage")
        for c in self.stages:
            finite = c[np.isfinite(c)]
            if finite.size and finite.min() < 0.0:
                raise ValueError("costs must be non-negative")

    @property
    def num_stages(self) -> int:
        return len(self.stages)

    @property
    def num_satellites(self) -> int:
        return self.stages[0].shape[0]

    def strategy(self, s: int, k: int, i: int, j: int) -> TransferStrategy:
        return _STRATEGY_ORDER[int(self.strategy_codes[s][k, i, j])]

    def dump_csv(self, path) -> None:
        """Audit dump, one row per entry.

        Columns: stage (1-based), sat (0-based), from_slot, to_slot
        (0-based), delta_v_km_s, strategy.
        """
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["stage", "sat", "from_slot", "to_slot", "delta_v_km_s", "strategy"])
            for s, (costs, codes) in enumerate(zip(self.stages, self.strategy_codes), start=1):
                n_sat, n_from, n_to = costs.shape
                for k in range(n_sat):
                    for i in range(n_from):
                        for j in range(n_to):
                            writer.writerow(
                                [s, k, i, j, repr(float(costs[k, i, j])),
                                 _STRATEGY_ORDER[int(codes[k, i, j])].value]
                            )


def _pairwise_costs(
    from_slots: Sequence[ClassicalOrbitalElements],
    to_slots: Sequence[ClassicalOrbitalElements],
    max_revs: int,
    earth: EarthModel,
) -> Tuple[np.ndarray, np.ndarray]:
    """Vectorised all-pairs strategy pricing for one satellite and stage.

    Mirrors transfer_cost formula-for-formula; the equivalence is pinned
    by tests.  Returns (delta_v, strategy_code) arrays of shape
    (len(from_slots), len(to_slots)).
    """
    a = from_slots[0].semi_major_axis
    for slot in list(from_slots) + list(to_slots):
        if abs(slot.semi_major_axis - a) > _SMA_TOL_KM:
            raise ValueError("slot grids must share one altitude")
    fi = np.array([s.inclination for s in from_slots])
    fo = np.array([s.raan for s in from_slots])
    fu = np.array([s.argument_of_latitude for s in from_slots])
    ti = np.array([s.inclination for s in to_slots])
    to = np.array([s.raan for s in to_slots])
    tu = np.array([s.argument_of_latitude for s in to_slots])

    di = ti[None, :] - fi[:, None]
    draan = np.mod(to[None, :] - fo[:, None], TWO_PI)
    draan = np.where(draan > math.pi, draan - TWO_PI, draan)
    dphi = np.mod(fu[:, None] - tu[None, :], TWO_PI)
    has_i = np.abs(di) > _ANGLE_TOL
    has_o = np.abs(draan) > _ANGLE_TOL
    has_p = (dphi > _ANGLE_TOL) & (dphi < TWO_PI - _ANGLE_TOL)

    mu = earth.mu_km3_s2
    v = math.sqrt(mu / a)
    n = mean_motion(a, earth)
    floor_radius = earth.radius_km + _MIN_PERIAPSIS_CLEARANCE_KM

    # Phasing leg: minimum over rev pairs with the clearance guard.  The
    # guard region covers every negative vis-viva argument, so the NaNs
    # produced under errstate are always replaced.
    phase_dv = np.full(dphi.shape, np.inf)
    for k_tgt in range(1, max_revs + 1):
        t_phase = (TWO_PI * k_tgt + dphi) / n
        for k_tfr in range(1, max_revs + 1):
            a_phase = mu ** (1.0 / 3.0) * (t_phase / (TWO_PI * k_tfr)) ** (2.0 / 3.0)
            bad = (a_phase < a) & (2.0 * a_phase - a < floor_radius)
            with np.errstate(invalid="ignore"):
                dv = 2.0 * np.abs(np.sqrt(mu * (2.0 / a - 1.0 / a_phase)) - v)
            phase_dv = np.minimum(phase_dv, np.where(bad, np.inf, dv))
    phase_dv = np.where(has_p, phase_dv, 0.0)

    # Plane legs through the same half-angle identities as the scalar ops.
    incl_dv = 2.0 * v * np.sin(np.abs(di) / 2.0)
    i2 = fi[:, None] + di
    raan_dv = 2.0 * v * np.abs(np.sin(fi[:, None]) * np.sin(draan / 2.0))
    radicand = np.sin(di / 2.0) ** 2 + np.sin(fi[:, None]) * np.sin(i2) * np.sin(draan / 2.0) ** 2
    plane_dv = 2.0 * v * np.sqrt(np.clip(radicand, 0.0, 1.0))

    inf = np.inf
    stay = np.where(~(has_i | has_o | has_p), 0.0, inf)
    only_p = has_p & ~(has_i | has_o)
    only_i = has_i & ~(has_o | has_p)
    only_o = has_o & ~(has_i | has_p)
    plane_ok = (has_i | has_o) & ~has_p
    ip = has_i & ~has_o & has_p
    op = has_o & ~has_i & has_p
    pp = (has_i | has_o) & has_p
    # Candidate values in the same preference order as the scalar path;
    # argmin keeps the first minimum, which is the tie-break.
    stack = np.stack(
        [
            stay,
            np.where(only_p, phase_dv, inf),
            np.where(only_i, incl_dv, inf),
            np.where(only_o, raan_dv, inf),
            np.where(plane_ok, plane_dv, inf),
            np.where(ip, incl_dv + phase_dv, inf),
            np.where(op, raan_dv + phase_dv, inf),
            np.where(pp, plane_dv + phase_dv, inf),
        ]
    )
    codes = stack.argmin(axis=0)
    best = np.take_along_axis(stack, codes[None], axis=0)[0]
    return best, codes.astype(np.int8)


def build_cost_matrix(
    grids: Sequence[Sequence[Sequence[ClassicalOrbitalElements]]],
    time_grid: TimeGrid,
    max_revs: int = 4,
    budget: float = 2.0,
    initial_orbits: Optional[Sequence[ClassicalOrbitalElements]] = None,
    earth: EarthModel = EARTH,
) -> CostMatrix:
    """Assemble c[s][k][i][j] for every stage boundary.

    grids[k][s] lists satellite k's slots for stage s; the lists must be
    element-wise identical across stages (the grid does not move, the
    orbits in it drift).  Both endpoints of every edge are propagated to
    the stage-boundary epoch before pricing, so later stages see the
    accumulated nodal drift.

    Args:
        initial_orbits: where each satellite actually starts; defaults to
            slot 0 of its stage-0 grid.
    """
    n_sats = len(grids)
    n_stages = time_grid.num_stages
    if initial_orbits is None:
        initial_orbits = [grids[k][0][0] for k in range(n_sats)]
    stages = []
    codes = []
    for s in range(n_stages):
        epoch = time_grid.stage_start_time(s)
        per_sat_cost = []
        per_sat_code = []
        for k in range(n_sats):
            to_slots = [propagate(slot, epoch, earth=earth) for slot in grids[k][s]]
            if s == 0:
                from_slots = [propagate(initial_orbits[k], epoch, earth=earth)]
            else:
                from_slots = [propagate(slot, epoch, earth=earth) for slot in grids[k][s - 1]]
            c, sc = _pairwise_costs(from_slots, to_slots, max_revs, earth)
            per_sat_cost.append(c)
            per_sat_code.append(sc)
        stages.append(np.stack(per_sat_cost))
        codes.append(np.stack(per_sat_code))
    return CostMatrix(
        stages=tuple(stages),
        budget=np.full(n_sats, float(budget)),
        strategy_codes=tuple(codes),
    )
