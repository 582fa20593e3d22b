"""Orbital state representation and Keplerian propagation with J2 secular rates.

Everything downstream (visibility, slew planning, maneuver costing) consumes the
types and propagation routines defined here. The propagator is deliberately
simple: two-body motion plus first-order J2 secular drift on the node, the
argument of periapsis and the mean motion. That substitutes for a full SGP4
ephemeris; the comparison statistics this library produces depend on relative
model performance, not absolute ephemeris fidelity, and the substitution is
noted in every generated report.

Angles are radians and lengths kilometers throughout. Epochs are seconds from
scenario start.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

__all__ = [
    "EarthModel",
    "EARTH",
    "ClassicalOrbitalElements",
    "StateVector",
    "GeodeticPoint",
    "TimeGrid",
    "KeplerConvergenceError",
    "solve_kepler",
    "mean_motion",
    "orbital_period",
    "j2_raan_rate",
    "j2_arg_periapsis_rate",
    "j2_mean_motion",
    "true_to_mean_anomaly",
    "mean_to_true_anomaly",
    "propagate",
    "coe_to_state",
    "state_to_coe",
    "geodetic_to_eci",
    "eci_positions",
]

TWO_PI = 2.0 * math.pi

# Newton iteration settings for Kepler's equation (residual tolerance in rad).
KEPLER_TOL = 1e-12
KEPLER_MAX_ITER = 50

# Below this eccentricity the periapsis direction is numerically meaningless,
# below this inclination the node is; both thresholds fix the round-trip
# conventions used by state_to_coe.
_CIRCULAR_EPS = 1e-8
_EQUATORIAL_EPS = 1e-8


@dataclass(frozen=True)
class EarthModel:
    """Physical constants of the (spherical) Earth model.

    Attributes:
        mu_km3_s2: Gravitational parameter, km^3/s^2.
        j2: Second zonal harmonic coefficient, dimensionless.
        radius_km: Mean equatorial radius, km. The Earth is treated as a
            sphere of this radius for both occlusion tests and geodetic
            conversion.
        rotation_rate_rad_s: Uniform sidereal rotation rate, rad/s.
    """

    mu_km3_s2: float = 398600.4418
    j2: float = 1.08262668e-3
    radius_km: float = 6378.137
    rotation_rate_rad_s: float = 7.2921159e-5


EARTH = EarthModel()


class KeplerConvergenceError(ArithmeticError):
    """Newton iteration on Kepler's equation failed to converge."""


def _norm_angle(x: float) -> float:
    """Normalize an angle to [0, 2*pi)."""
    y = math.fmod(x, TWO_PI)
    return y + TWO_PI if y < 0.0 else y


@dataclass(frozen=True)
class ClassicalOrbitalElements:
    """One orbit (a, e, i, RAAN, argument of periapsis, true anomaly) at an epoch.

    This is the unit of an "orbital slot": a candidate orbit a satellite may
    occupy during a stage. Angles are normalized to [0, 2*pi) on construction.

    Attributes:
        semi_major_axis: a, km.
        eccentricity: e, dimensionless, in [0, 1).
        inclination: i, rad, in [0, pi].
        raan: Right ascension of the ascending node, rad.
        arg_periapsis: Argument of periapsis, rad.
        true_anomaly: nu, rad.
        epoch: Seconds from scenario start at which these elements hold.
    """

    semi_major_axis: float
    eccentricity: float
    inclination: float
    raan: float
    arg_periapsis: float
    true_anomaly: float
    epoch: float = 0.0

    def __post_init__(self) -> None:
        if not self.semi_major_axis > 0.0:
            raise ValueError(f"semi-major axis must be positive, got {self.semi_major_axis}")
        if not 0.0 <= self.eccentricity < 1.0:
            raise ValueError(f"eccentricity must be in [0, 1), got {self.eccentricity}")
        if not 0.0 <= self.inclination <= math.pi:
            raise ValueError(f"inclination must be in [0, pi], got {self.inclination}")
        for name in ("raan", "arg_periapsis", "true_anomaly"):
            object.__setattr__(self, name, _norm_angle(getattr(self, name)))

    @property
    def semi_latus_rectum(self) -> float:
        """p = a (1 - e^2), km."""
        return self.semi_major_axis * (1.0 - self.eccentricity**2)

    @property
    def argument_of_latitude(self) -> float:
        """u = omega + nu in [0, 2*pi), the along-track phase for near-circular orbits."""
        return _norm_angle(self.arg_periapsis + self.true_anomaly)


@dataclass(frozen=True)
class StateVector:
    """Inertial position/velocity at a time.

    Attributes:
        position: ECI position, km, shape (3,).
        velocity: ECI velocity, km/s, shape (3,).
        time: Seconds from scenario start.
    """

    position: np.ndarray
    velocity: np.ndarray
    time: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float))
        object.__setattr__(self, "velocity", np.asarray(self.velocity, dtype=float))
        if self.position.shape != (3,) or self.velocity.shape != (3,):
            raise ValueError("position and velocity must be 3-vectors")


@dataclass(frozen=True)
class GeodeticPoint:
    """Spherical-Earth geodetic coordinates.

    Attributes:
        latitude: rad, in [-pi/2, pi/2].
        longitude: rad, in [-pi, pi).
        altitude: km above the sphere, >= 0.
    """

    latitude: float
    longitude: float
    altitude: float = 0.0

    def __post_init__(self) -> None:
        if not -math.pi / 2 <= self.latitude <= math.pi / 2:
            raise ValueError(f"latitude out of range: {self.latitude}")
        if not -math.pi <= self.longitude < math.pi:
            # Accept +pi and wrap it rather than erroring; anything else is a bug.
            if math.isclose(self.longitude, math.pi):
                object.__setattr__(self, "longitude", -math.pi)
            else:
                raise ValueError(f"longitude out of range: {self.longitude}")
        if self.altitude < 0.0:
            raise ValueError(f"altitude must be >= 0, got {self.altitude}")


@dataclass(frozen=True)
class TimeGrid:
    """Discretization of the scenario horizon.

    The horizon of ``duration`` seconds is cut into ``num_steps`` visibility
    steps of ``step`` seconds, grouped into ``num_stages`` equal stages (the
    reconfiguration sub-horizons) and into control opportunities of
    ``control_step`` seconds (the slew decision points). Step t (1-based)
    covers time [(t-1)*step, t*step); stage s covers steps
    (s-1)*steps_per_stage+1 .. s*steps_per_stage.

    Raises:
        ValueError: if the divisibility requirements fail. The stage check
            names the valid stage counts so the caller can adjust.
    """

    duration: float
    step: float
    control_step: float
    num_stages: int = 1
    num_steps: int = field(init=False)
    steps_per_stage: int = field(init=False)

    def __post_init__(self) -> None:
        if self.step <= 0.0:
            raise ValueError("step must be positive")
        if self.control_step < self.step:
            raise ValueError("control_step must be >= step")
        t = self.duration / self.step
        if abs(t - round(t)) > 1e-9 or round(t) < 1:
            raise ValueError(f"duration {self.duration} s is not a positive multiple of step {self.step} s")
        object.__setattr__(self, "num_steps", int(round(t)))
        r = self.control_step / self.step
        if abs(r - round(r)) > 1e-9:
            raise ValueError(f"control_step {self.control_step} s is not a multiple of step {self.step} s")
        if self.num_stages < 1:
            raise ValueError("num_stages must be >= 1")
        if self.num_steps % self.num_stages != 0:
            divisors = [s for s in range(1, min(self.num_steps, 12) + 1) if self.num_steps % s == 0]
            raise ValueError(
                f"num_steps {self.num_steps} is not divisible by num_stages {self.num_stages}; "
                f"choose a stage count dividing it (e.g. {divisors})"
            )
        object.__setattr__(self, "steps_per_stage", self.num_steps // self.num_stages)

    @property
    def steps_per_opportunity(self) -> int:
        return int(round(self.control_step / self.step))

    @property
    def num_opportunities(self) -> int:
        """Number of control opportunities covering all steps (last may be partial)."""
        r = self.steps_per_opportunity
        return -(-self.num_steps // r)

    def step_time(self, t_index: int) -> float:
        """Start time of 0-based step index ``t_index``."""
        return t_index * self.step

    def opportunity_of_step(self, t_index: int) -> int:
        """0-based control opportunity containing 0-based step ``t_index``."""
        return t_index // self.steps_per_opportunity

    def opportunity_time(self, tau_index: int) -> float:
        """Start time of 0-based opportunity ``tau_index``."""
        return tau_index * self.control_step

    def stage_start_time(self, s_index: int) -> float:
        """Start time of 0-based stage ``s_index`` (its maneuver epoch)."""
        return s_index * self.steps_per_stage * self.step

    def stage_step_range(self, s_index: int) -> tuple[int, int]:
        """Half-open global 0-based step range [lo, hi) of 0-based stage ``s_index``."""
        lo = s_index * self.steps_per_stage
        return lo, lo + self.steps_per_stage


# ---------------------------------------------------------------------------
# Kepler machinery
# ---------------------------------------------------------------------------


def mean_motion(semi_major_axis: float, earth: EarthModel = EARTH) -> float:
    """Two-body mean motion n = sqrt(mu / a^3), rad/s."""
    return math.sqrt(earth.mu_km3_s2 / semi_major_axis**3)


def orbital_period(semi_major_axis: float, earth: EarthModel = EARTH) -> float:
    """Two-body period 2*pi*sqrt(a^3/mu), s."""
    return TWO_PI / mean_motion(semi_major_axis, earth)


def solve_kepler(mean_anomaly: float, eccentricity: float) -> float:
    """Solve Kepler's equation E - e sin E = M for the eccentric anomaly.

    Newton iteration seeded with M (or M + e when M > pi), run to a residual
    below ``KEPLER_TOL`` radians.

    Args:
        mean_anomaly: M, rad; any value, internally normalized to [0, 2*pi).
        eccentricity: e in [0, 1).

    Returns:
        Eccentric anomaly E in [0, 2*pi).

    Raises:
        KeplerConvergenceError: no convergence within ``KEPLER_MAX_ITER``
            iterations, which signals a pathological eccentricity.
    """
    m = _norm_angle(mean_anomaly)
    e = eccentricity
    big_e = m + e if m > math.pi else m
    for _ in range(KEPLER_MAX_ITER):
        f = big_e - e * math.sin(big_e) - m
        if abs(f) < KEPLER_TOL:
            return _norm_angle(big_e)
        big_e -= f / (1.0 - e * math.cos(big_e))
    raise KeplerConvergenceError(
        f"Kepler iteration did not reach {KEPLER_TOL} rad in {KEPLER_MAX_ITER} steps (M={m}, e={e})"
    )


def _solve_kepler_array(mean_anomaly: np.ndarray, eccentricity: float) -> np.ndarray:
    """Vectorized Newton solve of Kepler's equation; same seed and tolerance as the scalar path."""
    m = np.mod(mean_anomaly, TWO_PI)
    e = eccentricity
    big_e = np.where(m > math.pi, m + e, m)
    for _ in range(KEPLER_MAX_ITER):
        f = big_e - e * np.sin(big_e) - m
        if np.max(np.abs(f)) < KEPLER_TOL:
            return np.mod(big_e, TWO_PI)
        big_e = big_e - f / (1.0 - e * np.cos(big_e))
    raise KeplerConvergenceError(f"vectorized Kepler iteration did not converge (e={e})")


def true_to_mean_anomaly(true_anomaly: float, eccentricity: float) -> float:
    """Convert true anomaly to mean anomaly via the eccentric anomaly."""
    e = eccentricity
    nu = true_anomaly
    big_e = math.atan2(math.sqrt(1.0 - e * e) * math.sin(nu), e + math.cos(nu))
    return _norm_angle(big_e - e * math.sin(big_e))


def mean_to_true_anomaly(mean_anomaly: float, eccentricity: float) -> float:
    """Convert mean anomaly to true anomaly (solves Kepler's equation)."""
    e = eccentricity
    big_e = solve_kepler(mean_anomaly, e)
    return _norm_angle(
        math.atan2(math.sqrt(1.0 - e * e) * math.sin(big_e), math.cos(big_e) - e)
    )


# ---------------------------------------------------------------------------
# J2 secular rates
# ---------------------------------------------------------------------------


def j2_raan_rate(coe: ClassicalOrbitalElements, earth: EarthModel = EARTH) -> float:
    """Secular node drift dOmega/dt = -(3/2) n J2 (R_E/p)^2 cos i, rad/s."""
    n = mean_motion(coe.semi_major_axis, earth)
    ratio = earth.radius_km / coe.semi_latus_rectum
    return -1.5 * n * earth.j2 * ratio**2 * math.cos(coe.inclination)


def j2_arg_periapsis_rate(coe: ClassicalOrbitalElements, earth: EarthModel = EARTH) -> float:
    """Secular periapsis drift domega/dt = (3/4) n J2 (R_E/p)^2 (5 cos^2 i - 1), rad/s."""
    n = mean_motion(coe.semi_major_axis, earth)
    ratio = earth.radius_km / coe.semi_latus_rectum
    return 0.75 * n * earth.j2 * ratio**2 * (5.0 * math.cos(coe.inclination) ** 2 - 1.0)


def j2_mean_motion(coe: ClassicalOrbitalElements, earth: EarthModel = EARTH) -> float:
    """J2-corrected mean motion, rad/s.

    n_bar = n [1 + (3/4) J2 (R_E/p)^2 sqrt(1-e^2) (3 cos^2 i - 1)]
    """
    n = mean_motion(coe.semi_major_axis, earth)
    ratio = earth.radius_km / coe.semi_latus_rectum
    correction = (
        0.75
        * earth.j2
        * ratio**2
        * math.sqrt(1.0 - coe.eccentricity**2)
        * (3.0 * math.cos(coe.inclination) ** 2 - 1.0)
    )
    return n * (1.0 + correction)


# ---------------------------------------------------------------------------
# Propagation
# ---------------------------------------------------------------------------


def propagate(
    coe: ClassicalOrbitalElements,
    dt: float,
    include_j2: bool = True,
    earth: EarthModel = EARTH,
) -> ClassicalOrbitalElements:
    """Advance elements by ``dt`` seconds.

    The shape of the orbit (a, e, i) is untouched. The mean anomaly advances
    at the J2-corrected rate (or the two-body rate if ``include_j2`` is
    false); RAAN and the argument of periapsis drift at their J2 secular
    rates.

    Args:
        coe: Elements at their own epoch.
        dt: Non-negative time offset, s.
        include_j2: Apply the secular J2 model. Disable for pure two-body
            motion (period-closure checks and the like).
        earth: Physical constants.

    Returns:
        Elements at epoch + dt.
    """
    if dt < 0.0:
        raise ValueError(f"dt must be >= 0, got {dt}")
    if dt == 0.0:
        return coe
    if include_j2:
        n_eff = j2_mean_motion(coe, earth)
        raan = coe.raan + j2_raan_rate(coe, earth) * dt
        argp = coe.arg_periapsis + j2_arg_periapsis_rate(coe, earth) * dt
    else:
        n_eff = mean_motion(coe.semi_major_axis, earth)
        raan = coe.raan
        argp = coe.arg_periapsis
    m0 = true_to_mean_anomaly(coe.true_anomaly, coe.eccentricity)
    nu = mean_to_true_anomaly(m0 + n_eff * dt, coe.eccentricity)
    return replace(
        coe,
        raan=_norm_angle(raan),
        arg_periapsis=_norm_angle(argp),
        true_anomaly=nu,
        epoch=coe.epoch + dt,
    )


def coe_to_state(coe: ClassicalOrbitalElements, earth: EarthModel = EARTH) -> StateVector:
    """Convert elements to an inertial state vector.

    Perifocal position/velocity from the conic equation, rotated into ECI by
    the 3-1-3 sequence (RAAN about z, inclination about x, argument of
    periapsis about z).
    """
    p = coe.semi_latus_rectum
    e = coe.eccentricity
    nu = coe.true_anomaly
    r_mag = p / (1.0 + e * math.cos(nu))
    r_pf = np.array([r_mag * math.cos(nu), r_mag * math.sin(nu), 0.0])
    v_scale = math.sqrt(earth.mu_km3_s2 / p)
    v_pf = np.array([-v_scale * math.sin(nu), v_scale * (e + math.cos(nu)), 0.0])

    co, so = math.cos(coe.raan), math.sin(coe.raan)
    ci, si = math.cos(coe.inclination), math.sin(coe.inclination)
    cw, sw = math.cos(coe.arg_periapsis), math.sin(coe.arg_periapsis)
    rot = np.array(
        [
            [co * cw - so * sw * ci, -co * sw - so * cw * ci, so * si],
            [so * cw + co * sw * ci, -so * sw + co * cw * ci, -co * si],
            [sw * si, cw * si, ci],
        ]
    )
    return StateVector(position=rot @ r_pf, velocity=rot @ v_pf, time=coe.epoch)


def state_to_coe(state: StateVector, earth: EarthModel = EARTH) -> ClassicalOrbitalElements:
    """Recover classical elements from an inertial state.

    Inverse of :func:`coe_to_state` for non-degenerate orbits. Degenerate
    directions follow fixed conventions so round trips are well defined:
    near-circular sets omega = 0 and measures nu from the ascending node;
    near-equatorial sets RAAN = 0.

    Raises:
        ValueError: rectilinear motion (negligible angular momentum).
    """
    r = state.position
    v = state.velocity
    mu = earth.mu_km3_s2
    r_mag = float(np.linalg.norm(r))
    v_mag = float(np.linalg.norm(v))

    h = np.cross(r, v)
    h_mag = float(np.linalg.norm(h))
    if h_mag < 1e-9 * r_mag * max(v_mag, 1e-12):
        raise ValueError("degenerate (rectilinear) state: angular momentum is numerically zero")

    energy = 0.5 * v_mag**2 - mu / r_mag
    if energy >= 0.0:
        raise ValueError("state is not elliptic (specific energy >= 0)")
    a = -mu / (2.0 * energy)

    e_vec = ((v_mag**2 - mu / r_mag) * r - float(np.dot(r, v)) * v) / mu
    e = float(np.linalg.norm(e_vec))
    inc = math.acos(max(-1.0, min(1.0, h[2] / h_mag)))

    node = np.array([-h[1], h[0], 0.0])
    node_mag = float(np.linalg.norm(node))
    equatorial = node_mag < _EQUATORIAL_EPS * h_mag
    circular = e < _CIRCULAR_EPS

    rdotv = float(np.dot(r, v))
    if equatorial:
        raan = 0.0
        ref = np.array([1.0, 0.0, 0.0])
    else:
        raan = _norm_angle(math.atan2(node[1], node[0]))
        ref = node / node_mag

    if circular:
        argp = 0.0
        # nu measured from the reference direction (node, or x-axis if equatorial)
        cos_nu = max(-1.0, min(1.0, float(np.dot(ref, r)) / r_mag))
        nu = math.acos(cos_nu)
        # Above the plane of reference: use h to orient the sign.
        if float(np.dot(np.cross(ref, r), h)) < 0.0:
            nu = TWO_PI - nu
    else:
        e_hat = e_vec / e
        cos_w = max(-1.0, min(1.0, float(np.dot(ref, e_hat))))
        argp = math.acos(cos_w)
        if float(np.dot(np.cross(ref, e_vec), h)) < 0.0:
            argp = TWO_PI - argp
        cos_nu = max(-1.0, min(1.0, float(np.dot(e_hat, r)) / r_mag))
        nu = math.acos(cos_nu)
        if rdotv < 0.0:
            nu = TWO_PI - nu

    return ClassicalOrbitalElements(
        semi_major_axis=a,
        eccentricity=e,
        inclination=inc,
        raan=raan,
        arg_periapsis=_norm_angle(argp),
        true_anomaly=_norm_angle(nu),
        epoch=state.time,
    )


# ---------------------------------------------------------------------------
# Ground points and batch propagation
# ---------------------------------------------------------------------------


def geodetic_to_eci(
    point: GeodeticPoint,
    t: float,
    rotation_offset: float = 0.0,
    earth: EarthModel = EARTH,
) -> np.ndarray:
    """Inertial position of a ground point at time ``t``.

    Spherical Earth rotated by theta = rotation_rate * t + rotation_offset, so
    the returned norm is exactly radius + altitude.
    """
    theta = earth.rotation_rate_rad_s * t + rotation_offset
    lon = point.longitude + theta
    rho = earth.radius_km + point.altitude
    clat = math.cos(point.latitude)
    return np.array(
        [rho * clat * math.cos(lon), rho * clat * math.sin(lon), rho * math.sin(point.latitude)]
    )


def eci_positions(
    coe: ClassicalOrbitalElements,
    times: np.ndarray,
    include_j2: bool = True,
    earth: EarthModel = EARTH,
) -> np.ndarray:
    """Inertial positions of one orbit at many absolute times.

    Vectorized counterpart of ``coe_to_state(propagate(coe, t - epoch))``
    restricted to position. Times must be >= the element epoch.

    Args:
        coe: Elements at their epoch.
        times: Absolute times, s, shape (N,).
        include_j2: Same meaning as in :func:`propagate`.

    Returns:
        Array of shape (N, 3), km.
    """
    t = np.asarray(times, dtype=float)
    dt = t - coe.epoch
    if dt.size and float(dt.min()) < -1e-9:
        raise ValueError("times precede the element epoch")
    e = coe.eccentricity
    if include_j2:
        n_eff = j2_mean_motion(coe, earth)
        raan = coe.raan + j2_raan_rate(coe, earth) * dt
        argp = coe.arg_periapsis + j2_arg_periapsis_rate(coe, earth) * dt
    else:
        n_eff = mean_motion(coe.semi_major_axis, earth)
        raan = np.full_like(dt, coe.raan)
        argp = np.full_like(dt, coe.arg_periapsis)
    m0 = true_to_mean_anomaly(coe.true_anomaly, e)
    big_e = _solve_kepler_array(m0 + n_eff * dt, e)
    nu = np.mod(np.arctan2(np.sqrt(1.0 - e * e) * np.sin(big_e), np.cos(big_e) - e), TWO_PI)

    p = coe.semi_latus_rectum
    r_mag = p / (1.0 + e * np.cos(nu))
    u = argp + nu
    cu, su = np.cos(u), np.sin(u)
    co, so = np.cos(raan), np.sin(raan)
    ci = math.cos(coe.inclination)
    si = math.sin(coe.inclination)
    out = np.empty(t.shape + (3,), dtype=float)
    out[..., 0] = r_mag * (co * cu - so * su * ci)
    out[..., 1] = r_mag * (so * cu + co * su * ci)
    out[..., 2] = r_mag * (su * si)
    return out
