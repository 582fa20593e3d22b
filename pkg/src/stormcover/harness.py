"""Scenario harness: the model matrix, corpus runs, and comparison reports.

Everything upstream of this module scores one satellite, one grid, or one
solve at a time.  Here the pieces are wired into the comparison the
project exists for: eight observation concepts run against the same set
of moving-target tracks, scored by the same reward arithmetic.

The concept matrix::

    name  stages  phases  plane axis  scored by
    B        1       1        1       all-stay plan on a one-slot grid
    A        1       1        1       per-satellite slew schedules
    P1       2      10        1       reconfiguration, phasing slots
    P2       2      20        1       reconfiguration, phasing slots
    P3       4      10        1       reconfiguration, phasing slots
    P4       4      20        1       reconfiguration, phasing slots
    U1       2      15        5       reconfiguration, plane + phasing
    U2       4      15        5       reconfiguration, plane + phasing

Model B goes through the same visibility tensor and reward matrix as the
reconfiguration concepts (an all-stay plan whose only slot is the initial
orbit), so the baseline and the optimized concepts never disagree about
what "seen" means.  Model A sums per-satellite agility rewards without
deduplicating steps where two satellites observe at once; its reward is
an observation count rather than a coverage count, which can favour A in
dense constellations and is noted wherever the numbers are reported.

Within one track evaluation every visibility tensor is propagated on the
finest stage partition any requested model uses and coarser models get
bit-rearranged merges of it.  The vectorized Kepler solve iterates until
the whole batch converges, so identical orbits propagated in differently
blocked batches can drift by an ulp; sharing one partition removes that
source of disagreement and makes "the baseline is the slot-0 row of every
tensor" an exact statement, not an approximate one.

Later concepts are warm-started from earlier winners mapped onto their
grid.  Phase doubling lands on bitwise-identical slot angles and stage
splitting lands on bitwise-identical boundary epochs with zero-cost
stays, so a mapped winner is always budget-feasible and the chained
models can never score below their coarser parents, whether or not the
solver finishes its optimality proof.
"""

from __future__ import annotations

import csv
import io
import math
import os
import re
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .agility import (
    AgilityConfig,
    SlewSchedule,
    optimize_slew_schedule,
    score_agility,
    slewed_step_visibility,
)
from .maneuvers import (
    CostMatrix,
    GridMode,
    SlotGridSpec,
    build_cost_matrix,
    generate_slot_grid,
)
from .mcrp import (
    DEFAULT_NODE_LIMIT,
    ReconfigPlan,
    RewardMatrix,
    active_point_of_step,
    build_reward_matrix,
    score_plan,
    solve_mcrp,
)
from .orbits import ClassicalOrbitalElements, TimeGrid, geodetic_to_eci
from .tracks import TcTrack, parse_track_csv, serialize_track, synthesize_track, target_eci_table, track_to_targets
from .visibility import FovSpec, VisibilityTensor, compute_vtw_tensor

__all__ = [
    "Spacecraft",
    "DEFAULT_SATELLITES",
    "ModelSpec",
    "MODEL_MATRIX",
    "MODEL_ORDER",
    "parse_models",
    "ScenarioConfig",
    "default_corpus",
    "parse_config",
    "load_config",
    "merge_tensor_stages",
    "ModelResult",
    "evaluate_track",
    "run_corpus",
    "ComparisonReport",
    "build_report",
    "emit_report",
    "write_outputs",
]


# ---------------------------------------------------------------------------
# Constellation and model matrix
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Spacecraft:
    """One constellation member: a name and its initial orbit."""

    name: str
    elements: ClassicalOrbitalElements


def _coe(a, e, i_deg, raan_deg, argp_deg, nu_deg) -> ClassicalOrbitalElements:
    return ClassicalOrbitalElements(
        a,
        e,
        math.radians(i_deg),
        math.radians(raan_deg),
        math.radians(argp_deg),
        math.radians(nu_deg),
    )


#: Five flown sun-synchronous imagers used as the reference constellation.
DEFAULT_SATELLITES: Tuple[Spacecraft, ...] = (
    Spacecraft("DMC3-FM3", _coe(7006.01, 17.07e-4, 97.72, 307.83, 77.52, 104.88)),
    Spacecraft("DMC3-FM1", _coe(6992.54, 8.03e-4, 97.72, 306.02, 116.04, 302.43)),
    Spacecraft("HUANJING-1B", _coe(7003.07, 48.93e-4, 97.80, 89.49, 107.47, 140.62)),
    Spacecraft("HUANJING-1A", _coe(7007.36, 39.24e-4, 97.79, 85.41, 116.27, 189.24)),
    Spacecraft("NIGERIASAT-1", _coe(6992.76, 41.58e-4, 97.85, 228.61, 260.58, 149.89)),
)


@dataclass(frozen=True)
class ModelSpec:
    """Shape of one observation concept.

    kind is "baseline", "agile", or "reconfig"; the grid fields only
    matter for the reconfiguration kinds (baseline runs on the degenerate
    one-slot grid so it shares their code path).
    """

    name: str
    kind: str
    num_stages: int
    num_phases: int
    num_plane_axis: int

    @property
    def family(self) -> Tuple[int, int]:
        """Key of the slot grid this concept shares with its siblings."""
        return (self.num_phases, self.num_plane_axis)


MODEL_MATRIX: Dict[str, ModelSpec] = {
    "B": ModelSpec("B", "baseline", 1, 1, 1),
    "A": ModelSpec("A", "agile", 1, 1, 1),
    "P1": ModelSpec("P1", "reconfig", 2, 10, 1),
    "P2": ModelSpec("P2", "reconfig", 2, 20, 1),
    "P3": ModelSpec("P3", "reconfig", 4, 10, 1),
    "P4": ModelSpec("P4", "reconfig", 4, 20, 1),
    "U1": ModelSpec("U1", "reconfig", 2, 15, 5),
    "U2": ModelSpec("U2", "reconfig", 4, 15, 5),
}

MODEL_ORDER: Tuple[str, ...] = tuple(MODEL_MATRIX)

# Warm-start sources per model: (source name, mapping) pairs, applied when
# the source ran earlier in the same track evaluation.
_WARM_SOURCES: Dict[str, Tuple[Tuple[str, str], ...]] = {
    "P2": (("P1", "phase-double"),),
    "P3": (("P1", "stage-split"),),
    "P4": (("P2", "stage-split"), ("P3", "phase-double")),
    "U2": (("U1", "stage-split"),),
}


def parse_models(text: str) -> Tuple[str, ...]:
    """Parse a comma list of concept names into canonical order.

    ``X..Y`` expands to the span of the canonical order from X to Y
    inclusive, so ``B,A,P1..U2`` selects everything.  Duplicates
    collapse; the result always runs in canonical order because warm
    chains need their sources solved first.
    """
    picked = set()
    for piece in text.split(","):
        piece = piece.strip()
        if not piece:
            raise ValueError("empty model name in list")
        if ".." in piece:
            lo, _, hi = piece.partition("..")
            lo, hi = lo.strip(), hi.strip()
            for name in (lo, hi):
                if name not in MODEL_MATRIX:
                    raise ValueError(f"unknown model {name!r}")
            a, b = MODEL_ORDER.index(lo), MODEL_ORDER.index(hi)
            if a > b:
                raise ValueError(f"model range {piece!r} runs against canonical order")
            picked.update(MODEL_ORDER[a : b + 1])
        elif piece in MODEL_MATRIX:
            picked.add(piece)
        else:
            raise ValueError(f"unknown model {piece!r}")
    if not picked:
        raise ValueError("no models selected")
    return tuple(name for name in MODEL_ORDER if name in picked)


# ---------------------------------------------------------------------------
# Scenario configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything a corpus run needs besides the tracks themselves."""

    satellites: Tuple[Spacecraft, ...] = DEFAULT_SATELLITES
    models: Tuple[str, ...] = MODEL_ORDER
    fov_half_angle: float = math.radians(45.0)
    step: float = 300.0
    control_step: float = 1800.0
    max_rate: float = math.radians(3.0)
    max_slew: float = math.radians(35.0)
    budget_km_s: float = 2.0
    max_revs: int = 4
    node_limit: int = DEFAULT_NODE_LIMIT

    def __post_init__(self) -> None:
        if not self.satellites:
            raise ValueError("need at least one satellite")
        names = [sc.name for sc in self.satellites]
        if len(set(names)) != len(names):
            raise ValueError("satellite names must be unique")
        if not self.models:
            raise ValueError("need at least one model")
        for name in self.models:
            if name not in MODEL_MATRIX:
                raise ValueError(f"unknown model {name!r}")
        if self.max_revs < 1:
            raise ValueError("max_revs must be at least 1")
        if self.node_limit < 0:
            raise ValueError("node_limit must be non-negative")
        if self.budget_km_s < 0.0:
            raise ValueError("budget must be non-negative")
        # angles and grid spacings are validated by FovSpec, AgilityConfig
        # and TimeGrid when first used; duplicating their rules here would
        # just let the copies drift

    @property
    def fov(self) -> FovSpec:
        return FovSpec(self.fov_half_angle)

    @property
    def agility(self) -> AgilityConfig:
        return AgilityConfig(
            self.max_rate, self.max_rate, self.max_rate, self.max_slew, self.control_step
        )


def default_corpus(count: int = 20) -> Tuple[TcTrack, ...]:
    """Seeded synthetic tracks ramping from short to long lifetimes.

    Track i (1-based) lasts 2.75 + (i - 1) * 12.75 / (count - 1) days
    rounded to the nearest quarter day, so a 20-track corpus spans 2.75
    through 15.5 days; basins alternate west, east, west, ...
    """
    if count < 1:
        raise ValueError("corpus needs at least one track")
    tracks = []
    for i in range(1, count + 1):
        days = 2.75 if count == 1 else 2.75 + (i - 1) * 12.75 / (count - 1)
        days = round(days * 4.0) / 4.0
        region = "west-hemisphere" if i % 2 == 1 else "east-hemisphere"
        tracks.append(synthesize_track(i, days, region))
    return tuple(tracks)


_CONFIG_KEYS = frozenset(
    {
        "fov_deg",
        "step_s",
        "control_step_s",
        "max_rate_deg_s",
        "max_slew_deg",
        "budget_km_s",
        "max_revs",
        "node_limit",
        "models",
        "tracks",
    }
)


def parse_config(
    text: str, base_dir: Optional[str] = None
) -> Tuple[ScenarioConfig, Tuple[TcTrack, ...]]:
    """Read a flat ``key = value`` scenario file.

    ``#`` starts a comment, blank lines are skipped, every key is
    optional and unknown or repeated keys are rejected with their line
    number.  The ``tracks`` value is either ``synthetic:N`` or a comma
    list of track CSV paths resolved against ``base_dir``.

    Returns the configuration and the loaded track corpus.
    """
    values: Dict[str, Tuple[int, str]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, eq, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if not eq or not key:
            raise ValueError(f"config line {lineno}: expected `key = value`, got {raw.strip()!r}")
        if key not in _CONFIG_KEYS:
            raise ValueError(f"config line {lineno}: unknown key {key!r}")
        if key in values:
            raise ValueError(f"config line {lineno}: duplicate key {key!r}")
        if not val:
            raise ValueError(f"config line {lineno}: empty value for {key!r}")
        values[key] = (lineno, val)

    def take(key: str, conv):
        if key not in values:
            return None
        lineno, val = values.pop(key)
        try:
            return conv(val)
        except ValueError as exc:
            raise ValueError(f"config line {lineno}: bad {key}: {exc}") from None

    kwargs = {}
    fov = take("fov_deg", float)
    if fov is not None:
        kwargs["fov_half_angle"] = math.radians(fov)
    step = take("step_s", float)
    if step is not None:
        kwargs["step"] = step
    control = take("control_step_s", float)
    if control is not None:
        kwargs["control_step"] = control
    rate = take("max_rate_deg_s", float)
    if rate is not None:
        kwargs["max_rate"] = math.radians(rate)
    slew = take("max_slew_deg", float)
    if slew is not None:
        kwargs["max_slew"] = math.radians(slew)
    budget = take("budget_km_s", float)
    if budget is not None:
        kwargs["budget_km_s"] = budget
    revs = take("max_revs", int)
    if revs is not None:
        kwargs["max_revs"] = revs
    nodes = take("node_limit", int)
    if nodes is not None:
        kwargs["node_limit"] = nodes
    models = take("models", parse_models)
    if models is not None:
        kwargs["models"] = models
    tracks_spec = values.pop("tracks", None)
    config = ScenarioConfig(**kwargs)
    tracks = _load_tracks(tracks_spec[1] if tracks_spec else "synthetic:20", base_dir)
    return config, tracks


def _load_tracks(spec: str, base_dir: Optional[str]) -> Tuple[TcTrack, ...]:
    if spec.startswith("synthetic:"):
        arg = spec[len("synthetic:") :]
        try:
            count = int(arg)
        except ValueError:
            raise ValueError(f"bad synthetic track count {arg!r}") from None
        return default_corpus(count)
    tracks = []
    for piece in spec.split(","):
        path = piece.strip()
        if not path:
            raise ValueError("empty track path in list")
        if base_dir is not None and not os.path.isabs(path):
            path = os.path.join(base_dir, path)
        with open(path, "rb") as fh:
            tracks.append(parse_track_csv(fh.read()))
    return tuple(tracks)


def load_config(path) -> Tuple[ScenarioConfig, Tuple[TcTrack, ...]]:
    """parse_config on a file, resolving track paths beside it."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    return parse_config(text, base_dir=os.path.dirname(os.path.abspath(path)))


# ---------------------------------------------------------------------------
# Tensor plumbing
# ---------------------------------------------------------------------------


def merge_tensor_stages(tensor: VisibilityTensor, factor: int) -> VisibilityTensor:
    """Concatenate runs of ``factor`` consecutive stages into one.

    Pure bit rearrangement: the merged tensor holds exactly the bits of
    the original, so slicing by coarser stages afterwards is bit-for-bit
    identical to having propagated on the coarse partition blocks.
    """
    s, k, j, t_stage, p = tensor.dims
    if factor < 1 or s % factor != 0:
        raise ValueError(f"cannot merge {s} stages in runs of {factor}")
    if factor == 1:
        return tensor
    full = tensor.unpack()
    full = full.reshape(s // factor, factor, k, j, t_stage, p)
    full = full.transpose(0, 2, 3, 1, 4, 5).reshape(s // factor, k, j, factor * t_stage, p)
    bits = np.packbits(full.reshape(-1).astype(np.uint8), bitorder="little")
    counts = None
    if tensor.slot_counts is not None:
        # identical slot lists per stage, so any stage of the run speaks for it
        counts = tensor.slot_counts.reshape(s // factor, factor, k)[:, 0, :].copy()
    return VisibilityTensor(
        dims=(s // factor, k, j, factor * t_stage, p), bits=bits, slot_counts=counts
    )


# ---------------------------------------------------------------------------
# Single-track evaluation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ModelResult:
    """Score of one concept on one track.

    proven means the reward is the concept's exact score rather than an
    incumbent left behind by a tripped node budget; it is always True for
    the baseline and agile concepts.
    """

    model: str
    reward: float
    proven: bool
    elapsed_s: float
    plan: Optional[ReconfigPlan] = None
    schedules: Optional[Tuple[SlewSchedule, ...]] = None


class _TrackWorkspace:
    """Shared per-track caches: grids, tensors, rewards, cost matrices."""

    def __init__(self, track: TcTrack, config: ScenarioConfig, models: Sequence[str]):
        self.track = track
        self.config = config
        self.models = tuple(models)
        self._grids: Dict[int, TimeGrid] = {}
        self._slots: Dict[Tuple[int, int], List[List[ClassicalOrbitalElements]]] = {}
        self._top_tensors: Dict[Tuple[int, int], VisibilityTensor] = {}
        self._tensors: Dict[Tuple[int, int, int], VisibilityTensor] = {}
        self._rewards: Dict[int, RewardMatrix] = {}
        self._costs: Dict[Tuple[int, int, int], CostMatrix] = {}
        # every tensor is propagated on the finest requested partition so
        # differently blocked Kepler batches cannot disagree by an ulp
        self.top_stages = max(MODEL_MATRIX[m].num_stages for m in self.models)
        base = self.grid_for(1)
        self.targets = track_to_targets(track, base)
        self.table = target_eci_table(self.targets, base)

    def grid_for(self, stages: int) -> TimeGrid:
        if stages not in self._grids:
            self._grids[stages] = TimeGrid(
                self.track.duration_seconds, self.config.step, self.config.control_step, stages
            )
        return self._grids[stages]

    def family_slots(self, spec: ModelSpec) -> List[List[ClassicalOrbitalElements]]:
        key = spec.family
        if key not in self._slots:
            mode = GridMode.UNRESTRICTED if spec.num_plane_axis > 1 else GridMode.PHASING_ONLY
            gspec = SlotGridSpec(num_phases=spec.num_phases, num_plane_axis=spec.num_plane_axis)
            self._slots[key] = [
                generate_slot_grid(sc.elements, gspec, self.config.budget_km_s, mode)
                for sc in self.config.satellites
            ]
        return self._slots[key]

    def tensor_for(self, spec: ModelSpec) -> VisibilityTensor:
        key = spec.family + (spec.num_stages,)
        if key not in self._tensors:
            if spec.family not in self._top_tensors:
                slots = self.family_slots(spec)
                per_sat = [[slot_list] * self.top_stages for slot_list in slots]
                self._top_tensors[spec.family] = compute_vtw_tensor(
                    per_sat, self.table, self.grid_for(self.top_stages), self.config.fov
                )
            self._tensors[key] = merge_tensor_stages(
                self._top_tensors[spec.family], self.top_stages // spec.num_stages
            )
        return self._tensors[key]

    def rewards_for(self, stages: int) -> RewardMatrix:
        if stages not in self._rewards:
            grid = self.grid_for(stages)
            self._rewards[stages] = build_reward_matrix(
                grid.num_steps, self.targets.num_points, stages
            )
        return self._rewards[stages]

    def costs_for(self, spec: ModelSpec) -> CostMatrix:
        key = spec.family + (spec.num_stages,)
        if key not in self._costs:
            slots = self.family_slots(spec)
            self._costs[key] = build_cost_matrix(
                [[slot_list] * spec.num_stages for slot_list in slots],
                self.grid_for(spec.num_stages),
                max_revs=self.config.max_revs,
                budget=self.config.budget_km_s,
                initial_orbits=[sc.elements for sc in self.config.satellites],
            )
        return self._costs[key]


def _run_baseline(ws: _TrackWorkspace) -> ModelResult:
    """Model B: every satellite rides its initial orbit the whole horizon."""
    t0 = time.perf_counter()
    spec = MODEL_MATRIX["B"]
    tensor = ws.tensor_for(spec)
    rewards = ws.rewards_for(spec.num_stages)
    n_sats = len(ws.config.satellites)
    paths = tuple((0, 0) for _ in range(n_sats))
    shell = ReconfigPlan(
        paths=paths,
        per_stage_cost=np.zeros((n_sats, 1)),
        objective=0.0,
        proven_optimal=True,
    )
    z = score_plan(shell, tensor, rewards)
    plan = replace(shell, objective=z, objective_bound=z)
    return ModelResult("B", z, True, time.perf_counter() - t0, plan=plan)


def _run_agile(ws: _TrackWorkspace) -> ModelResult:
    """Model A: independent slew schedules, rewards summed per satellite."""
    t0 = time.perf_counter()
    config = ws.config
    grid = ws.grid_for(1)
    n_steps = grid.num_steps
    n_points = ws.targets.num_points
    active = np.array(
        [active_point_of_step(t, n_steps, n_points) for t in range(n_steps)]
    )
    step_targets = ws.table[np.arange(n_steps), active]

    spo = grid.steps_per_opportunity
    opp_targets = []
    for i in range(grid.num_opportunities):
        lo = i * spo
        hi = min(lo + spo, n_steps)
        when = grid.opportunity_time(i)
        points = sorted(set(active[lo:hi].tolist()))
        opp_targets.append(
            np.array([geodetic_to_eci(ws.targets.points[p], when) for p in points])
        )

    acfg = config.agility
    total = 0.0
    schedules = []
    for sc in config.satellites:
        schedule = optimize_slew_schedule(sc.elements, opp_targets, acfg, grid)
        visible = slewed_step_visibility(
            sc.elements, schedule, step_targets, config.fov_half_angle, grid
        )
        total += score_agility(schedule, visible, acfg, grid).total_reward
        schedules.append(schedule)
    return ModelResult("A", total, True, time.perf_counter() - t0, schedules=tuple(schedules))


def _map_flat(flat: Tuple[int, ...], source: ModelSpec, target: ModelSpec, kind: str, n_sats: int) -> Tuple[int, ...]:
    """Re-index a flat slot vector from the source grid onto the target's."""
    if kind == "phase-double":
        mapped = []
        for j in flat:
            plane, phase = divmod(j, source.num_phases)
            mapped.append(plane * target.num_phases + 2 * phase)
        return tuple(mapped)
    if kind == "stage-split":
        factor = target.num_stages // source.num_stages
        mapped = []
        for k in range(n_sats):
            path = flat[k * source.num_stages : (k + 1) * source.num_stages]
            for j in path:
                mapped.extend([j] * factor)
        return tuple(mapped)
    raise ValueError(f"unknown warm mapping {kind!r}")


def _warm_candidates(
    spec: ModelSpec,
    results: Dict[str, ModelResult],
    costs: CostMatrix,
    n_sats: int,
) -> List[Tuple[int, ...]]:
    out = []
    n_stages = spec.num_stages
    for source_name, kind in _WARM_SOURCES.get(spec.name, ()):
        source = results.get(source_name)
        if source is None or source.plan is None:
            continue
        flat = tuple(j for path in source.plan.paths for j in path[1:])
        mapped = _map_flat(flat, MODEL_MATRIX[source_name], spec, kind, n_sats)
        # by construction the mapped vector costs exactly what the source
        # path did (identical slot floats, zero-cost stays at shared
        # epochs); the check guards against future grid-rule changes
        affordable = True
        for k in range(n_sats):
            path = (0,) + mapped[k * n_stages : (k + 1) * n_stages]
            spent = 0.0
            for s in range(n_stages):
                spent += float(costs.stages[s][k][path[s], path[s + 1]])
            if spent > float(costs.budget[k]):
                affordable = False
                break
        if affordable:
            out.append(mapped)
    return out


def _run_reconfig(ws: _TrackWorkspace, spec: ModelSpec, results: Dict[str, ModelResult]) -> ModelResult:
    t0 = time.perf_counter()
    tensor = ws.tensor_for(spec)
    rewards = ws.rewards_for(spec.num_stages)
    costs = ws.costs_for(spec)
    warm = _warm_candidates(spec, results, costs, len(ws.config.satellites))
    plan = solve_mcrp(
        tensor, rewards, costs, node_limit=ws.config.node_limit, warm_starts=warm
    )
    return ModelResult(
        spec.name, plan.objective, plan.proven_optimal, time.perf_counter() - t0, plan=plan
    )


def evaluate_track(
    track: TcTrack, config: ScenarioConfig, models: Optional[Sequence[str]] = None
) -> Dict[str, ModelResult]:
    """Score the requested concepts against one track.

    Concepts always run in canonical order so warm chains find their
    sources; an absent source simply contributes no seed.
    """
    requested = set(config.models if models is None else models)
    for name in requested:
        if name not in MODEL_MATRIX:
            raise ValueError(f"unknown model {name!r}")
    ordered = tuple(name for name in MODEL_ORDER if name in requested)
    results: Dict[str, ModelResult] = {}
    if not ordered:
        return results
    ws = _TrackWorkspace(track, config, ordered)
    for name in ordered:
        spec = MODEL_MATRIX[name]
        if spec.kind == "baseline":
            results[name] = _run_baseline(ws)
        elif spec.kind == "agile":
            results[name] = _run_agile(ws)
        else:
            results[name] = _run_reconfig(ws, spec, results)
    return results


# ---------------------------------------------------------------------------
# Corpus runs and reports
# ---------------------------------------------------------------------------


def _evaluate_job(job: Tuple[TcTrack, ScenarioConfig]) -> Dict[str, ModelResult]:
    track, config = job
    return evaluate_track(track, config)


def run_corpus(
    tracks: Sequence[TcTrack], config: ScenarioConfig, threads: int = 1
) -> Tuple["ComparisonReport", List[Dict[str, ModelResult]]]:
    """Evaluate every track and assemble the comparison report.

    threads > 1 fans tracks out to worker processes (the solves are CPU
    bound); results are gathered in track order either way, so the report
    does not depend on scheduling.
    """
    if threads < 1:
        raise ValueError("threads must be at least 1")
    jobs = [(track, config) for track in tracks]
    if threads == 1 or len(jobs) <= 1:
        all_results = [_evaluate_job(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            all_results = list(pool.map(_evaluate_job, jobs))
    report = build_report(tracks, config.models, all_results)
    return report, all_results


@dataclass(frozen=True)
class ComparisonReport:
    """Reward matrix over (track, model) with the derived statistics.

    rewards is float (tracks, models); proven mirrors it with the
    optimality flags.  Percentages are against the baseline column and a
    track with baseline reward zero is undefined rather than infinite.
    """

    track_names: Tuple[str, ...]
    model_names: Tuple[str, ...]
    rewards: np.ndarray
    proven: np.ndarray

    def __post_init__(self) -> None:
        shape = (len(self.track_names), len(self.model_names))
        if self.rewards.shape != shape or self.proven.shape != shape:
            raise ValueError(f"reward and proven matrices must be shaped {shape}")

    @property
    def num_tracks(self) -> int:
        return len(self.track_names)

    def column(self, model: str) -> int:
        try:
            return self.model_names.index(model)
        except ValueError:
            raise ValueError(f"model {model!r} not in report") from None

    def percent_increase(self, baseline: str = "B") -> np.ndarray:
        """Per-track percentage gain over the baseline column.

        Rows where the baseline scored zero come back NaN across every
        model; reports show them as "undefined" and keep them out of the
        summary statistics.
        """
        b = self.rewards[:, self.column(baseline)]
        with np.errstate(divide="ignore", invalid="ignore"):
            pct = 100.0 * (self.rewards - b[:, None]) / b[:, None]
        pct[b == 0.0] = np.nan
        return pct

    def outperformance(self) -> np.ndarray:
        """Counts out[r][c] of tracks where model c strictly beats model r."""
        return (self.rewards[:, None, :] > self.rewards[:, :, None]).sum(axis=0)


def build_report(
    tracks: Sequence[TcTrack],
    model_names: Sequence[str],
    per_track: Sequence[Dict[str, ModelResult]],
) -> ComparisonReport:
    names = tuple(model_names)
    if len(per_track) != len(tracks):
        raise ValueError("one result dict per track required")
    rewards = np.zeros((len(tracks), len(names)))
    proven = np.zeros((len(tracks), len(names)), dtype=bool)
    for r, results in enumerate(per_track):
        for c, name in enumerate(names):
            if name not in results:
                raise ValueError(f"track {tracks[r].name!r} has no result for model {name!r}")
            rewards[r, c] = results[name].reward
            proven[r, c] = results[name].proven
    return ComparisonReport(
        track_names=tuple(t.name for t in tracks),
        model_names=names,
        rewards=rewards,
        proven=proven,
    )


_SUMMARY_HEADER = [
    "model",
    "tracks",
    "proven",
    "mean_reward",
    "mean_pct_vs_B",
    "std_pct_vs_B",
    "min_pct_vs_B",
    "max_pct_vs_B",
    "undefined",
    "wins_vs_B",
]


def _summary_rows(report: ComparisonReport, baseline: str) -> List[List[str]]:
    rows: List[List[str]] = []
    if report.num_tracks == 0:
        return rows
    base_present = baseline in report.model_names
    pct = report.percent_increase(baseline) if base_present else None
    wins = report.outperformance() if base_present else None
    base_col = report.column(baseline) if base_present else -1
    for c, name in enumerate(report.model_names):
        z = report.rewards[:, c]
        row = [name, str(report.num_tracks), str(int(report.proven[:, c].sum()))]
        row.append(repr(float(z.mean())))
        if base_present:
            col = pct[:, c]
            good = col[~np.isnan(col)]
            undefined = int(np.isnan(col).sum())
            if good.size:
                row.extend(
                    [
                        repr(float(good.mean())),
                        repr(float(good.std())),
                        repr(float(good.min())),
                        repr(float(good.max())),
                    ]
                )
            else:
                row.extend(["undefined"] * 4)
            row.append(str(undefined))
            row.append(str(int(wins[base_col, c])))
        else:
            row.extend(["undefined"] * 4 + [str(report.num_tracks), "undefined"])
        rows.append(row)
    return rows


def emit_report(report: ComparisonReport, fmt: str, baseline: str = "B") -> bytes:
    """Render the per-model summary as ``csv`` or ``text-table`` bytes.

    An empty corpus renders as the header alone.  Percent statistics use
    the population standard deviation and skip undefined tracks; the
    undefined column counts how many were skipped.
    """
    rows = _summary_rows(report, baseline)
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(_SUMMARY_HEADER)
        writer.writerows(rows)
        return buf.getvalue().encode()
    if fmt == "text-table":
        def fmt_cell(cell: str) -> str:
            try:
                return f"{float(cell):.3f}"
            except ValueError:
                return cell

        display = [[row[0]] + [fmt_cell(c) for c in row[1:]] for row in rows]
        table = [_SUMMARY_HEADER] + display
        widths = [max(len(row[i]) for row in table) for i in range(len(_SUMMARY_HEADER))]
        lines = []
        for row in table:
            lines.append("  ".join(cell.rjust(w) for cell, w in zip(row, widths)).rstrip())
        return ("\n".join(lines) + "\n").encode()
    raise ValueError(f"unknown report format {fmt!r}")


# ---------------------------------------------------------------------------
# Output files
# ---------------------------------------------------------------------------


def _safe_name(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]+", "_", name)


def write_outputs(
    out_dir,
    tracks: Sequence[TcTrack],
    per_track: Sequence[Dict[str, ModelResult]],
    report: ComparisonReport,
    satellite_names: Optional[Sequence[str]] = None,
) -> None:
    """Write the run artifacts under ``out_dir``.

    rewards.csv, pct_increase.csv, outperform.csv and summary.csv carry
    the comparison; plans/ holds one slot-path CSV per reconfiguration
    solve (and the baseline's trivial plan), schedules/ the agile slew
    angles, tracks/ the evaluated polylines.  Every float is written with
    repr so identical runs produce identical bytes.
    """
    os.makedirs(out_dir, exist_ok=True)
    for sub in ("plans", "schedules", "tracks"):
        os.makedirs(os.path.join(out_dir, sub), exist_ok=True)

    def open_csv(name: str):
        return open(os.path.join(out_dir, name), "w", newline="", encoding="utf-8")

    with open_csv("rewards.csv") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["track", "model", "reward", "proven"])
        for r, name in enumerate(report.track_names):
            for c, model in enumerate(report.model_names):
                writer.writerow(
                    [name, model, repr(float(report.rewards[r, c])), str(int(report.proven[r, c]))]
                )

    base_present = "B" in report.model_names
    pct = report.percent_increase("B") if base_present else None
    with open_csv("pct_increase.csv") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["track", "model", "pct_increase_vs_B"])
        for r, name in enumerate(report.track_names):
            for c, model in enumerate(report.model_names):
                if pct is None or np.isnan(pct[r, c]):
                    writer.writerow([name, model, "undefined"])
                else:
                    writer.writerow([name, model, repr(float(pct[r, c]))])

    with open_csv("outperform.csv") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["model"] + list(report.model_names))
        counts = report.outperformance()
        for r, model in enumerate(report.model_names):
            writer.writerow([model] + [str(int(v)) for v in counts[r]])

    with open(os.path.join(out_dir, "summary.csv"), "wb") as fh:
        fh.write(emit_report(report, "csv"))

    for track, results in zip(tracks, per_track):
        stem = _safe_name(track.name)
        with open(os.path.join(out_dir, "tracks", f"{stem}.csv"), "wb") as fh:
            fh.write(serialize_track(track))
        for model, result in results.items():
            if result.plan is not None:
                result.plan.to_csv(os.path.join(out_dir, "plans", f"{stem}__{model}.csv"))
            if result.schedules is not None:
                for sat, schedule in enumerate(result.schedules):
                    if satellite_names is not None:
                        sat_name = _safe_name(satellite_names[sat])
                    else:
                        sat_name = f"sat{sat}"
                    path = os.path.join(
                        out_dir, "schedules", f"{stem}__{model}__{sat_name}.csv"
                    )
                    _write_schedule(path, schedule)


def _write_schedule(path, schedule: SlewSchedule) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["opportunity", "alpha_rad", "beta_rad", "gamma_rad"])
        for i, row in enumerate(schedule.angles):
            writer.writerow([i, repr(float(row[0])), repr(float(row[1])), repr(float(row[2]))])
