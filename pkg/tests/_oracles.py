"""Independent reference implementations used only by the test suite.

Each function here re-derives a quantity the library computes, using a
different algorithm or algebraic arrangement where possible (bisection
instead of Newton, angular-momentum vectors instead of the spherical law of
cosines, explicit factor-matrix products instead of closed forms, plain
Python loops instead of vectorized code). Tests compare library output
against these. Nothing in this module imports the package under test.
"""

from __future__ import annotations

import math

import numpy as np

MU = 398600.4418  # km^3/s^2
J2 = 1.08262668e-3
R_EARTH = 6378.137  # km
TWO_PI = 2.0 * math.pi


# ---------------------------------------------------------------------------
# Kepler / propagation oracles
# ---------------------------------------------------------------------------


def kepler_bisection(mean_anomaly: float, ecc: float, tol: float = 1e-13) -> float:
    """Solve E - e sin E = M by bisection (monotone for e < 1)."""
    m = mean_anomaly % TWO_PI
    lo, hi = 0.0, TWO_PI
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid - ecc * math.sin(mid) - m > 0.0:
            hi = mid
        else:
            lo = mid
        if hi - lo < tol:
            break
    return 0.5 * (lo + hi)


def visviva_speed(r_km: float, a_km: float) -> float:
    """Vis-viva: v = sqrt(mu (2/r - 1/a))."""
    return math.sqrt(MU * (2.0 / r_km - 1.0 / a_km))


def raan_drift_deg_per_day(a_km: float, ecc: float, inc_rad: float) -> float:
    """Secular J2 node rate, arranged with the (R/a)^2 / (1-e^2)^2 form."""
    n = math.sqrt(MU / a_km**3)
    rate = -1.5 * n * J2 * (R_EARTH / a_km) ** 2 * math.cos(inc_rad) / (1.0 - ecc**2) ** 2
    return math.degrees(rate) * 86400.0


def argp_drift_deg_per_day(a_km: float, ecc: float, inc_rad: float) -> float:
    n = math.sqrt(MU / a_km**3)
    rate = (
        0.75
        * n
        * J2
        * (R_EARTH / a_km) ** 2
        * (5.0 * math.cos(inc_rad) ** 2 - 1.0)
        / (1.0 - ecc**2) ** 2
    )
    return math.degrees(rate) * 86400.0


# ---------------------------------------------------------------------------
# Rotation-matrix oracles (explicit factor matrices, multiplied numerically)
# ---------------------------------------------------------------------------


def rot_x(a: float) -> np.ndarray:
    c, s = math.cos(a), math.sin(a)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, s], [0.0, -s, c]])


def rot_y(b: float) -> np.ndarray:
    c, s = math.cos(b), math.sin(b)
    return np.array([[c, 0.0, -s], [0.0, 1.0, 0.0], [s, 0.0, c]])


def rot_z(g: float) -> np.ndarray:
    c, s = math.cos(g), math.sin(g)
    return np.array([[c, s, 0.0], [-s, c, 0.0], [0.0, 0.0, 1.0]])


def rotation_product(a: float, b: float, g: float) -> np.ndarray:
    """M_x(alpha) @ M_y(beta) @ M_z(gamma), the order-of-rotation product."""
    return rot_x(a) @ rot_y(b) @ rot_z(g)


def angle_between(u: np.ndarray, v: np.ndarray) -> float:
    """Numerically stable angle via the cross/dot form."""
    u = np.asarray(u, float)
    v = np.asarray(v, float)
    return math.atan2(float(np.linalg.norm(np.cross(u, v))), float(np.dot(u, v)))


# ---------------------------------------------------------------------------
# Maneuver-cost oracles
# ---------------------------------------------------------------------------


def phasing_cost_brute(a_km: float, dphi_rad: float, max_revs: int) -> float:
    """Exhaustive minimum over (k_tgt, k_tfr) of the two-impulse phasing cost.

    Wait time t = (2 pi k_tgt + dphi) / n, transfer ellipse semi-major axis
    from its period t / k_tfr, both impulses at the departure radius a.
    Combinations whose phasing-orbit periapsis dips below R_EARTH + 100 km
    are discarded. Returns math.inf if none survive.
    """
    if dphi_rad == 0.0:
        return 0.0
    n = math.sqrt(MU / a_km**3)
    v_circ = math.sqrt(MU / a_km)
    best = math.inf
    for k_tgt in range(1, max_revs + 1):
        t_phase = (TWO_PI * k_tgt + dphi_rad) / n
        for k_tfr in range(1, max_revs + 1):
            a_ph = (MU * (t_phase / (TWO_PI * k_tfr)) ** 2) ** (1.0 / 3.0)
            if a_ph < a_km and 2.0 * a_ph - a_km < R_EARTH + 100.0:
                continue
            arg = MU * (2.0 / a_km - 1.0 / a_ph)
            if arg <= 0.0:
                continue
            dv = 2.0 * abs(math.sqrt(arg) - v_circ)
            best = min(best, dv)
    return best


def plane_rotation_angle(i1: float, raan1: float, i2: float, raan2: float) -> float:
    """Angle between two orbit planes via their angular-momentum directions.

    h_hat(i, O) = (sin i sin O, -sin i cos O, cos i); the rotation angle of a
    single-impulse plane change is the angle between the two h_hat vectors.
    """
    h1 = np.array([math.sin(i1) * math.sin(raan1), -math.sin(i1) * math.cos(raan1), math.cos(i1)])
    h2 = np.array([math.sin(i2) * math.sin(raan2), -math.sin(i2) * math.cos(raan2), math.cos(i2)])
    return angle_between(h1, h2)


def plane_change_dv(v_circ: float, rotation_angle: float) -> float:
    return 2.0 * v_circ * math.sin(0.5 * rotation_angle)


def transfer_cost_brute(
    a_km: float,
    i1: float,
    raan1: float,
    u1: float,
    i2: float,
    raan2: float,
    u2: float,
    max_revs: int,
    angle_tol: float = 1e-12,
) -> float:
    """Minimum delta-v over the seven strategy types, enumerated explicitly.

    u1, u2 are arguments of latitude; the phase to make up is
    (u1 - u2) mod 2 pi. A strategy is admissible only if it nulls every
    nonzero offset it does not address.
    """
    v = math.sqrt(MU / a_km)
    di = i2 - i1
    draan = (raan2 - raan1 + math.pi) % TWO_PI - math.pi
    dphi = (u1 - u2) % TWO_PI
    has_i = abs(di) > angle_tol
    has_o = abs(draan) > angle_tol
    has_p = dphi > angle_tol and TWO_PI - dphi > angle_tol

    cost_i = plane_change_dv(v, abs(di))
    theta_o = plane_rotation_angle(i1, 0.0, i1, draan)
    cost_o = plane_change_dv(v, theta_o)
    theta_c = plane_rotation_angle(i1, raan1, i2, raan2)
    cost_c = plane_change_dv(v, theta_c)
    cost_p = phasing_cost_brute(a_km, dphi, max_revs) if has_p else 0.0

    candidates = []
    if not (has_i or has_o or has_p):
        candidates.append(0.0)
    if not (has_i or has_o):
        candidates.append(cost_p)
    if not (has_o or has_p):
        candidates.append(cost_i)
    if not (has_i or has_p):
        candidates.append(cost_o)
    if not has_p:
        candidates.append(cost_c)
    if not has_o:
        candidates.append(cost_i + cost_p)
    if not has_i:
        candidates.append(cost_o + cost_p)
    candidates.append(cost_c + cost_p)
    return min(candidates)


# ---------------------------------------------------------------------------
# Agility oracles
# ---------------------------------------------------------------------------


def schedule_violations(
    angles: np.ndarray,
    max_angle: float,
    rates: tuple[float, float, float],
    control_step: float,
    tol: float = 1e-9,
) -> list[str]:
    """Walk a schedule and list every constraint violation (empty = feasible)."""
    problems: list[str] = []
    prev = np.zeros(3)
    for tau, row in enumerate(np.asarray(angles, float)):
        for axis in range(3):
            if abs(row[axis]) > max_angle + tol:
                problems.append(f"opportunity {tau}: axis {axis} angle {row[axis]} exceeds {max_angle}")
            if abs(row[axis] - prev[axis]) > rates[axis] * control_step + tol:
                problems.append(f"opportunity {tau}: axis {axis} rate exceeded")
        prev = row
    return problems


def grid_best_objective(objective, max_angle: float, step_deg: float = 5.0) -> float:
    """Brute-force minimum of a per-opportunity pointing objective on a cubic grid."""
    vals = np.deg2rad(np.arange(-math.degrees(max_angle), math.degrees(max_angle) + 1e-9, step_deg))
    best = math.inf
    for a in vals:
        for b in vals:
            for g in vals:
                best = min(best, objective(a, b, g))
    return best


def degraded_reward(step_visible: np.ndarray, step_angles: np.ndarray, max_angle: float) -> float:
    """Eq-style degraded reward sum, computed with plain loops."""
    z = 0.0
    for vis, (a, b, g) in zip(step_visible, step_angles):
        if vis:
            z += 1.0 - (abs(a) + abs(b) + abs(g)) / (2.0 * 3.0 * max_angle)
    return z


# ---------------------------------------------------------------------------
# Reward / coverage oracles
# ---------------------------------------------------------------------------


def active_windows_floor(num_steps: int, num_points: int) -> list[tuple[int, int]]:
    """1-based inclusive windows [floor(1+(p-1)T/P), floor(pT/P)] per point."""
    out = []
    for p in range(1, num_points + 1):
        lo = math.floor(1 + (p - 1) * num_steps / num_points)
        hi = math.floor(p * num_steps / num_points)
        out.append((lo, hi))
    return out


def score_plan_loops(
    vis: np.ndarray,
    rewards: np.ndarray,
    coverage_req: np.ndarray,
    paths: np.ndarray,
) -> float:
    """Objective of a slot plan by triple loop: z = sum pi * [count >= r]."""
    num_stages, num_sats, _, steps, points = vis.shape
    z = 0.0
    for s in range(num_stages):
        for t in range(steps):
            for p in range(points):
                count = 0
                for k in range(num_sats):
                    if vis[s, k, paths[k][s + 1], t, p]:
                        count += 1
                if count >= coverage_req[s, t, p]:
                    z += rewards[s, t, p]
    return z


def haversine_km(lat1: float, lon1: float, lat2: float, lon2: float, radius: float = R_EARTH) -> float:
    """Great-circle distance between two lat/lon points in radians."""
    dlat = lat2 - lat1
    dlon = lon2 - lon1
    h = math.sin(0.5 * dlat) ** 2 + math.cos(lat1) * math.cos(lat2) * math.sin(0.5 * dlon) ** 2
    return 2.0 * radius * math.asin(min(1.0, math.sqrt(h)))
