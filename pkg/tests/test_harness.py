"""Model matrix, scenario config, corpus evaluation, and report output."""

import csv
import io
import math
import os

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stormcover.harness import (
    DEFAULT_SATELLITES,
    MODEL_MATRIX,
    MODEL_ORDER,
    ComparisonReport,
    ModelSpec,
    ScenarioConfig,
    _map_flat,
    _safe_name,
    build_report,
    default_corpus,
    emit_report,
    evaluate_track,
    load_config,
    merge_tensor_stages,
    parse_config,
    parse_models,
    run_corpus,
    write_outputs,
)
from stormcover.tracks import parse_track_csv, serialize_track
from stormcover.visibility import VisibilityTensor


def short_track(name="TINY", samples=4, lat0=15.0, lon0=-55.0) -> bytes:
    """A handcrafted track CSV well below the synthetic corpus floor."""
    rows = ["name,time_hours,lat_deg,lon_deg"]
    for i in range(samples):
        rows.append(f"{name},{6.0 * i},{lat0 + 0.3 * i},{lon0 - 0.9 * i}")
    return ("\n".join(rows) + "\n").encode()


def tiny_config(**overrides) -> ScenarioConfig:
    base = dict(
        satellites=DEFAULT_SATELLITES[:2],
        models=("B", "A", "P1"),
        step=900.0,
        control_step=1800.0,
    )
    base.update(overrides)
    return ScenarioConfig(**base)


@pytest.fixture(scope="module")
def tiny_corpus():
    """Two short tracks evaluated once, shared by the report tests."""
    tracks = (
        parse_track_csv(short_track("ONE", samples=4)),
        parse_track_csv(short_track("TWO", samples=5, lat0=-12.0, lon0=140.0)),
    )
    config = tiny_config()
    report, per_track = run_corpus(tracks, config, threads=1)
    return tracks, config, report, per_track


class TestModelMatrix:
    def test_canonical_order(self):
        assert MODEL_ORDER == ("B", "A", "P1", "P2", "P3", "P4", "U1", "U2")

    def test_stage_and_grid_shapes(self):
        assert MODEL_MATRIX["B"].kind == "baseline"
        assert MODEL_MATRIX["A"].kind == "agile"
        for name in ("P1", "P2", "P3", "P4", "U1", "U2"):
            assert MODEL_MATRIX[name].kind == "reconfig"
        assert (MODEL_MATRIX["P1"].num_stages, MODEL_MATRIX["P1"].num_phases) == (2, 10)
        assert (MODEL_MATRIX["P2"].num_stages, MODEL_MATRIX["P2"].num_phases) == (2, 20)
        assert (MODEL_MATRIX["P3"].num_stages, MODEL_MATRIX["P3"].num_phases) == (4, 10)
        assert (MODEL_MATRIX["P4"].num_stages, MODEL_MATRIX["P4"].num_phases) == (4, 20)
        for name in ("U1", "U2"):
            assert MODEL_MATRIX[name].num_phases == 15
            assert MODEL_MATRIX[name].num_plane_axis == 5

    def test_family_groups_grid_sharers(self):
        assert MODEL_MATRIX["P1"].family == MODEL_MATRIX["P3"].family
        assert MODEL_MATRIX["P2"].family == MODEL_MATRIX["P4"].family
        assert MODEL_MATRIX["U1"].family == MODEL_MATRIX["U2"].family
        assert MODEL_MATRIX["P1"].family != MODEL_MATRIX["P2"].family

    def test_five_reference_satellites(self):
        assert len(DEFAULT_SATELLITES) == 5
        names = [sc.name for sc in DEFAULT_SATELLITES]
        assert names[0] == "DMC3-FM3"
        assert len(set(names)) == 5
        for sc in DEFAULT_SATELLITES:
            assert 6900.0 < sc.elements.semi_major_axis < 7100.0
            assert abs(math.degrees(sc.elements.inclination) - 97.8) < 0.2


class TestParseModels:
    def test_single_and_list(self):
        assert parse_models("B") == ("B",)
        assert parse_models("P2, B ,A") == ("B", "A", "P2")

    def test_span(self):
        assert parse_models("P1..P4") == ("P1", "P2", "P3", "P4")
        assert parse_models("B,A,P1..U2") == MODEL_ORDER
        assert parse_models("U1..U1") == ("U1",)

    def test_duplicates_collapse(self):
        assert parse_models("A,A,B,P1..P3,P2") == ("B", "A", "P1", "P2", "P3")

    def test_unknown_name(self):
        with pytest.raises(ValueError, match="unknown model 'Q'"):
            parse_models("B,Q")
        with pytest.raises(ValueError, match="unknown model"):
            parse_models("P1..Z9")

    def test_backwards_span(self):
        with pytest.raises(ValueError, match="against canonical order"):
            parse_models("U2..P1")

    def test_empty_pieces(self):
        with pytest.raises(ValueError, match="empty model name"):
            parse_models("B,,A")
        with pytest.raises(ValueError, match="empty model name"):
            parse_models("")


class TestScenarioConfig:
    def test_defaults_match_reference_setup(self):
        config = ScenarioConfig()
        assert config.satellites == DEFAULT_SATELLITES
        assert config.models == MODEL_ORDER
        assert config.fov_half_angle == pytest.approx(math.radians(45.0))
        assert config.step == 300.0
        assert config.control_step == 1800.0
        assert config.budget_km_s == 2.0
        assert config.max_revs == 4

    def test_property_bundles(self):
        config = ScenarioConfig()
        assert config.fov.half_angle == config.fov_half_angle
        ag = config.agility
        assert ag.max_rate_x == ag.max_rate_y == ag.max_rate_z == config.max_rate
        assert ag.max_angle == config.max_slew
        assert ag.control_step == config.control_step

    def test_rejects_duplicate_satellites(self):
        with pytest.raises(ValueError, match="unique"):
            ScenarioConfig(satellites=(DEFAULT_SATELLITES[0], DEFAULT_SATELLITES[0]))

    def test_rejects_empty_or_unknown_models(self):
        with pytest.raises(ValueError, match="at least one model"):
            ScenarioConfig(models=())
        with pytest.raises(ValueError, match="unknown model"):
            ScenarioConfig(models=("B", "X1"))

    def test_rejects_bad_scalars(self):
        with pytest.raises(ValueError, match="max_revs"):
            ScenarioConfig(max_revs=0)
        with pytest.raises(ValueError, match="node_limit"):
            ScenarioConfig(node_limit=-1)
        with pytest.raises(ValueError, match="budget"):
            ScenarioConfig(budget_km_s=-0.5)


class TestDefaultCorpus:
    def test_twenty_track_ramp(self):
        tracks = default_corpus(20)
        assert len(tracks) == 20
        days = [t.duration_seconds / 86400.0 for t in tracks]
        assert days[0] == 2.75
        assert days[-1] == 15.5
        for i, d in enumerate(days, start=1):
            expect = round((2.75 + (i - 1) * 12.75 / 19.0) * 4.0) / 4.0
            assert d == expect
            assert (d * 4.0) == int(d * 4.0)
        assert days == sorted(days)

    def test_basins_alternate(self):
        tracks = default_corpus(6)
        lons = [math.degrees(t.samples[0].lon_rad) for t in tracks]
        for i, lon in enumerate(lons, start=1):
            if i % 2 == 1:
                assert lon < 0.0, f"track {i} should start west"
            else:
                assert lon > 0.0, f"track {i} should start east"

    def test_single_track_corpus(self):
        (track,) = default_corpus(1)
        assert track.duration_seconds == pytest.approx(2.75 * 86400.0)

    def test_deterministic(self):
        a = default_corpus(5)
        b = default_corpus(5)
        assert [serialize_track(t) for t in a] == [serialize_track(t) for t in b]

    def test_rejects_empty(self):
        with pytest.raises(ValueError, match="at least one"):
            default_corpus(0)


class TestParseConfig:
    def test_empty_text_gives_defaults(self):
        config, tracks = parse_config("")
        assert config == ScenarioConfig()
        assert len(tracks) == 20
        assert tracks[0].duration_seconds == pytest.approx(2.75 * 86400.0)

    def test_full_file(self):
        text = """
        # reference scenario, trimmed
        fov_deg = 30
        step_s = 600       # coarse
        control_step_s = 1800
        max_rate_deg_s = 2.5
        max_slew_deg = 20
        budget_km_s = 1.5
        max_revs = 6
        node_limit = 5000
        models = B,P1..P2
        tracks = synthetic:3
        """
        config, tracks = parse_config(text)
        assert config.fov_half_angle == pytest.approx(math.radians(30.0))
        assert config.step == 600.0
        assert config.max_rate == pytest.approx(math.radians(2.5))
        assert config.max_slew == pytest.approx(math.radians(20.0))
        assert config.budget_km_s == 1.5
        assert config.max_revs == 6
        assert config.node_limit == 5000
        assert config.models == ("B", "P1", "P2")
        assert len(tracks) == 3

    def test_unknown_key_cites_line(self):
        with pytest.raises(ValueError, match="line 2: unknown key 'fov'"):
            parse_config("step_s = 300\nfov = 45\n")

    def test_duplicate_key_cites_line(self):
        with pytest.raises(ValueError, match="line 3: duplicate key"):
            parse_config("step_s = 300\n\nstep_s = 600\n")

    def test_missing_equals_cites_line(self):
        with pytest.raises(ValueError, match="line 1: expected"):
            parse_config("step_s 300\n")

    def test_empty_value_cites_line(self):
        with pytest.raises(ValueError, match="line 1: empty value"):
            parse_config("models =\n")

    def test_bad_number_cites_line_and_key(self):
        with pytest.raises(ValueError, match="line 2: bad max_revs"):
            parse_config("step_s = 300\nmax_revs = four\n")

    def test_bad_model_list_cites_line(self):
        with pytest.raises(ValueError, match="line 1: bad models.*unknown"):
            parse_config("models = B,WAT\n")

    def test_bad_synthetic_count(self):
        with pytest.raises(ValueError, match="bad synthetic track count"):
            parse_config("tracks = synthetic:many\n")

    def test_track_files_resolved_against_base_dir(self, tmp_path):
        (tmp_path / "a.csv").write_bytes(short_track("ALPHA"))
        (tmp_path / "b.csv").write_bytes(short_track("BRAVO", samples=5))
        config, tracks = parse_config("tracks = a.csv, b.csv\n", base_dir=str(tmp_path))
        assert [t.name for t in tracks] == ["ALPHA", "BRAVO"]

    def test_empty_track_path_rejected(self):
        # paths load in order, so the empty piece must come first to be seen
        with pytest.raises(ValueError, match="empty track path"):
            parse_config("tracks = ,a.csv\n", base_dir=".")

    def test_load_config_resolves_beside_file(self, tmp_path):
        (tmp_path / "storm.csv").write_bytes(short_track("STORM"))
        cfg = tmp_path / "run.cfg"
        cfg.write_text("step_s = 900\ntracks = storm.csv\n")
        config, tracks = load_config(str(cfg))
        assert config.step == 900.0
        assert [t.name for t in tracks] == ["STORM"]


def pack_tensor(full: np.ndarray, slot_counts=None) -> VisibilityTensor:
    bits = np.packbits(full.reshape(-1).astype(np.uint8), bitorder="little")
    return VisibilityTensor(dims=full.shape, bits=bits, slot_counts=slot_counts)


class TestMergeTensorStages:
    def test_known_rearrangement(self):
        rng = np.random.default_rng(3)
        full = rng.random((4, 2, 3, 5, 2)) < 0.3
        merged = merge_tensor_stages(pack_tensor(full), 2)
        assert merged.dims == (2, 2, 3, 10, 2)
        got = merged.unpack()
        # merged stage m stacks original stages 2m and 2m+1 along time
        for m in range(2):
            for a in range(2):
                block = got[m, :, :, 5 * a : 5 * (a + 1)]
                assert np.array_equal(block, full[2 * m + a])

    def test_merge_to_single_stage_concatenates_time(self):
        rng = np.random.default_rng(4)
        full = rng.random((4, 1, 2, 3, 2)) < 0.5
        merged = merge_tensor_stages(pack_tensor(full), 4)
        got = merged.unpack()
        assert got.shape == (1, 1, 2, 12, 2)
        for s in range(4):
            assert np.array_equal(got[0, :, :, 3 * s : 3 * (s + 1)], full[s])

    def test_factor_one_is_identity(self):
        tensor = pack_tensor(np.zeros((2, 1, 1, 4, 1), dtype=bool))
        assert merge_tensor_stages(tensor, 1) is tensor

    def test_slot_counts_survive(self):
        counts = np.array([[3, 2], [3, 2], [3, 2], [3, 2]])
        tensor = pack_tensor(np.zeros((4, 2, 3, 2, 1), dtype=bool), slot_counts=counts)
        merged = merge_tensor_stages(tensor, 2)
        assert np.array_equal(merged.slot_counts, [[3, 2], [3, 2]])

    def test_bad_factor(self):
        tensor = pack_tensor(np.zeros((4, 1, 1, 2, 1), dtype=bool))
        with pytest.raises(ValueError, match="merge 4 stages in runs of 3"):
            merge_tensor_stages(tensor, 3)
        with pytest.raises(ValueError, match="runs of 0"):
            merge_tensor_stages(tensor, 0)

    @settings(max_examples=40, deadline=None)
    @given(
        st.integers(0, 2 ** 32 - 1),
        st.sampled_from([1, 2, 3, 6]),
        st.integers(1, 3),
        st.integers(1, 4),
        st.integers(1, 5),
        st.integers(1, 3),
    )
    def test_bit_population_preserved(self, seed, factor, k, j, t_stage, p):
        # merging may not invent or drop a single observation bit
        rng = np.random.default_rng(seed)
        full = rng.random((6, k, j, t_stage, p)) < 0.4
        merged = merge_tensor_stages(pack_tensor(full), factor)
        assert merged.unpack().sum() == full.sum()
        per_slot = full.sum(axis=(0, 3, 4))
        assert np.array_equal(merged.unpack().sum(axis=(0, 3, 4)), per_slot)


class TestWarmMapping:
    def test_phase_double_keeps_plane_and_doubles_phase(self):
        src, dst = MODEL_MATRIX["U1"], ModelSpec("X", "reconfig", 2, 30, 5)
        # slot 17 on a 15-phase grid is plane 1, phase 2
        assert _map_flat((17,), src, dst, "phase-double", 1) == (1 * 30 + 4,)
        src, dst = MODEL_MATRIX["P1"], MODEL_MATRIX["P2"]
        assert _map_flat((0, 7), src, dst, "phase-double", 1) == (0, 14)

    def test_stage_split_repeats_per_satellite(self):
        src, dst = MODEL_MATRIX["P1"], MODEL_MATRIX["P3"]
        flat = (1, 2, 3, 4)  # two satellites, two stages each
        assert _map_flat(flat, src, dst, "stage-split", 2) == (1, 1, 2, 2, 3, 3, 4, 4)

    def test_unknown_mapping(self):
        with pytest.raises(ValueError, match="unknown warm mapping"):
            _map_flat((0,), MODEL_MATRIX["P1"], MODEL_MATRIX["P2"], "sideways", 1)


class TestEvaluateTrack:
    def test_tiny_scenario_results(self, tiny_corpus):
        tracks, config, report, per_track = tiny_corpus
        for results in per_track:
            assert set(results) == {"B", "A", "P1"}
            assert results["B"].proven and results["A"].proven
            assert results["B"].plan is not None
            assert results["P1"].plan is not None
            assert results["A"].schedules is not None
            assert len(results["A"].schedules) == 2
            for r in results.values():
                assert r.elapsed_s >= 0.0
                assert r.reward >= 0.0

    def test_reconfiguration_never_below_baseline(self, tiny_corpus):
        _, _, _, per_track = tiny_corpus
        for results in per_track:
            assert results["P1"].reward >= results["B"].reward

    def test_baseline_plan_is_all_stay(self, tiny_corpus):
        _, _, _, per_track = tiny_corpus
        for results in per_track:
            for path in results["B"].plan.paths:
                assert path == (0, 0)

    def test_model_subset_argument(self, tiny_corpus):
        tracks, config, _, per_track = tiny_corpus
        results = evaluate_track(tracks[0], config, models=["B"])
        assert set(results) == {"B"}
        assert results["B"].reward == per_track[0]["B"].reward

    def test_unknown_model_rejected(self, tiny_corpus):
        tracks, config, _, _ = tiny_corpus
        with pytest.raises(ValueError, match="unknown model"):
            evaluate_track(tracks[0], config, models=["B", "NOPE"])

    def test_empty_selection(self, tiny_corpus):
        tracks, config, _, _ = tiny_corpus
        assert evaluate_track(tracks[0], config, models=[]) == {}


class TestRunCorpus:
    def test_report_mirrors_results(self, tiny_corpus):
        tracks, config, report, per_track = tiny_corpus
        assert report.track_names == ("ONE", "TWO")
        assert report.model_names == ("B", "A", "P1")
        for r, results in enumerate(per_track):
            for c, name in enumerate(report.model_names):
                assert report.rewards[r, c] == results[name].reward
                assert report.proven[r, c] == results[name].proven

    def test_two_workers_match_inline(self, tiny_corpus):
        tracks, config, report, _ = tiny_corpus
        threaded, _ = run_corpus(tracks, config, threads=2)
        assert np.array_equal(threaded.rewards, report.rewards)
        assert np.array_equal(threaded.proven, report.proven)

    def test_empty_corpus(self):
        report, per_track = run_corpus((), tiny_config(), threads=1)
        assert per_track == []
        assert report.num_tracks == 0

    def test_rejects_bad_thread_count(self):
        with pytest.raises(ValueError, match="at least 1"):
            run_corpus((), tiny_config(), threads=0)


def toy_report() -> ComparisonReport:
    rewards = np.array(
        [
            [10.0, 12.0, 15.0],
            [0.0, 3.0, 2.0],
            [4.0, 4.0, 8.0],
        ]
    )
    return ComparisonReport(
        track_names=("T1", "T2", "T3"),
        model_names=("B", "A", "P1"),
        rewards=rewards,
        proven=np.ones((3, 3), dtype=bool),
    )


class TestComparisonReport:
    def test_percent_increase_values(self):
        pct = toy_report().percent_increase()
        assert pct[0, 0] == 0.0
        assert pct[0, 1] == pytest.approx(20.0)
        assert pct[0, 2] == pytest.approx(50.0)
        assert np.isnan(pct[1]).all()
        assert pct[2, 2] == pytest.approx(100.0)

    def test_outperformance_counts(self):
        out = toy_report().outperformance()
        # out[r][c] counts tracks where model c strictly beats model r
        assert np.array_equal(np.diag(out), [0, 0, 0])
        assert out[0, 1] == 2  # A beats B on T1 and T2, ties on T3
        assert out[1, 0] == 0  # B never strictly beats A
        assert out[0, 2] == 3
        assert out[2, 0] == 0
        assert out[1, 2] == 2 and out[2, 1] == 1

    def test_column_lookup(self):
        report = toy_report()
        assert report.column("P1") == 2
        with pytest.raises(ValueError, match="not in report"):
            report.column("U2")

    def test_shape_validation(self):
        with pytest.raises(ValueError, match="must be shaped"):
            ComparisonReport(
                track_names=("T1",),
                model_names=("B",),
                rewards=np.zeros((2, 1)),
                proven=np.zeros((1, 1), dtype=bool),
            )

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2 ** 32 - 1), st.integers(1, 6), st.integers(2, 4))
    def test_outperformance_antisymmetry(self, seed, n_tracks, n_models):
        rng = np.random.default_rng(seed)
        rewards = rng.integers(0, 4, size=(n_tracks, n_models)).astype(float)
        names = tuple(f"M{i}" for i in range(n_models))
        report = ComparisonReport(
            track_names=tuple(f"T{i}" for i in range(n_tracks)),
            model_names=names,
            rewards=rewards,
            proven=np.ones((n_tracks, n_models), dtype=bool),
        )
        out = report.outperformance()
        assert (np.diag(out) == 0).all()
        # wins both ways can never exceed the number of tracks
        assert ((out + out.T) <= n_tracks).all()
        ties = (rewards[:, None, :] == rewards[:, :, None]).sum(axis=0)
        assert np.array_equal(out + out.T + ties, np.full_like(out, n_tracks))


class TestBuildReport:
    def test_missing_model_rejected(self, tiny_corpus):
        tracks, _, _, per_track = tiny_corpus
        partial = [{k: v for k, v in per_track[0].items() if k != "A"}, per_track[1]]
        with pytest.raises(ValueError, match="no result for model 'A'"):
            build_report(tracks, ("B", "A", "P1"), partial)

    def test_length_mismatch_rejected(self, tiny_corpus):
        tracks, _, _, per_track = tiny_corpus
        with pytest.raises(ValueError, match="one result dict per track"):
            build_report(tracks, ("B",), per_track[:1])


class TestEmitReport:
    def test_csv_layout(self):
        data = emit_report(toy_report(), "csv").decode()
        rows = list(csv.reader(io.StringIO(data)))
        assert rows[0] == [
            "model", "tracks", "proven", "mean_reward", "mean_pct_vs_B",
            "std_pct_vs_B", "min_pct_vs_B", "max_pct_vs_B", "undefined", "wins_vs_B",
        ]
        assert len(rows) == 4
        b_row = rows[1]
        assert b_row[0] == "B"
        assert b_row[1] == "3" and b_row[2] == "3"
        # t2 has baseline zero, so exactly one undefined track per model
        assert [r[8] for r in rows[1:]] == ["1", "1", "1"]
        assert float(rows[3][4]) == pytest.approx(75.0)  # mean of 50 and 100

    def test_undefined_statistics_when_baseline_always_zero(self):
        report = ComparisonReport(
            track_names=("T1",),
            model_names=("B", "A"),
            rewards=np.array([[0.0, 5.0]]),
            proven=np.ones((1, 2), dtype=bool),
        )
        rows = list(csv.reader(io.StringIO(emit_report(report, "csv").decode())))
        assert rows[1][4:8] == ["undefined"] * 4
        assert rows[1][8] == "1"

    def test_empty_corpus_header_only(self):
        report = ComparisonReport(
            track_names=(), model_names=("B",), rewards=np.zeros((0, 1)),
            proven=np.zeros((0, 1), dtype=bool),
        )
        assert emit_report(report, "csv") == (
            b"model,tracks,proven,mean_reward,mean_pct_vs_B,std_pct_vs_B,"
            b"min_pct_vs_B,max_pct_vs_B,undefined,wins_vs_B\n"
        )
        text = emit_report(report, "text-table").decode()
        assert text.split() == emit_report(report, "csv").decode().strip().split(",")

    def test_text_table_shape(self):
        text = emit_report(toy_report(), "text-table").decode()
        lines = text.splitlines()
        assert lines[0].split() == [
            "model", "tracks", "proven", "mean_reward", "mean_pct_vs_B",
            "std_pct_vs_B", "min_pct_vs_B", "max_pct_vs_B", "undefined", "wins_vs_B",
        ]
        assert len(lines) == 4
        assert "75.000" in lines[3]
        assert text.endswith("\n")

    def test_unknown_format(self):
        with pytest.raises(ValueError, match="unknown report format"):
            emit_report(toy_report(), "yaml")

    def test_missing_baseline_column(self):
        report = ComparisonReport(
            track_names=("T1",), model_names=("A",), rewards=np.array([[2.0]]),
            proven=np.ones((1, 1), dtype=bool),
        )
        rows = list(csv.reader(io.StringIO(emit_report(report, "csv").decode())))
        assert rows[1][4:8] == ["undefined"] * 4
        assert rows[1][9] == "undefined"


class TestWriteOutputs:
    def test_file_inventory(self, tiny_corpus, tmp_path):
        tracks, config, report, per_track = tiny_corpus
        out = tmp_path / "run"
        write_outputs(out, tracks, per_track, report)
        for name in ("rewards.csv", "pct_increase.csv", "outperform.csv", "summary.csv"):
            assert (out / name).is_file(), name
        for track in tracks:
            assert (out / "tracks" / f"{track.name}.csv").is_file()
            assert (out / "plans" / f"{track.name}__B.csv").is_file()
            assert (out / "plans" / f"{track.name}__P1.csv").is_file()
            assert (out / "schedules" / f"{track.name}__A__sat0.csv").is_file()
            assert (out / "schedules" / f"{track.name}__A__sat1.csv").is_file()

    def test_rewards_csv_round_trips(self, tiny_corpus, tmp_path):
        tracks, config, report, per_track = tiny_corpus
        out = tmp_path / "run"
        write_outputs(out, tracks, per_track, report)
        with open(out / "rewards.csv", newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["track", "model", "reward", "proven"]
        assert len(rows) == 1 + 2 * 3
        for row in rows[1:]:
            r = report.track_names.index(row[0])
            c = report.model_names.index(row[1])
            assert float(row[2]) == report.rewards[r, c]
            assert row[3] == str(int(report.proven[r, c]))

    def test_outperform_csv_is_square(self, tiny_corpus, tmp_path):
        tracks, config, report, per_track = tiny_corpus
        out = tmp_path / "run"
        write_outputs(out, tracks, per_track, report)
        with open(out / "outperform.csv", newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["model", "B", "A", "P1"]
        counts = report.outperformance()
        for i, row in enumerate(rows[1:]):
            assert row[0] == report.model_names[i]
            assert [int(v) for v in row[1:]] == list(counts[i])

    def test_repeat_writes_are_byte_identical(self, tiny_corpus, tmp_path):
        tracks, config, report, per_track = tiny_corpus
        first, second = tmp_path / "a", tmp_path / "b"
        write_outputs(first, tracks, per_track, report)
        write_outputs(second, tracks, per_track, report)
        for name in ("rewards.csv", "pct_increase.csv", "outperform.csv", "summary.csv"):
            assert (first / name).read_bytes() == (second / name).read_bytes()

    def test_satellite_names_reach_schedule_files(self, tiny_corpus, tmp_path):
        tracks, config, report, per_track = tiny_corpus
        out = tmp_path / "named"
        write_outputs(out, tracks, per_track, report, satellite_names=["Alpha Sat", "B/2"])
        assert (out / "schedules" / "ONE__A__Alpha_Sat.csv").is_file()
        assert (out / "schedules" / "ONE__A__B_2.csv").is_file()

    def test_schedule_rows(self, tiny_corpus, tmp_path):
        tracks, config, report, per_track = tiny_corpus
        out = tmp_path / "run"
        write_outputs(out, tracks, per_track, report)
        with open(out / "schedules" / "ONE__A__sat0.csv", newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["opportunity", "alpha_rad", "beta_rad", "gamma_rad"]
        schedule = per_track[0]["A"].schedules[0]
        assert len(rows) == 1 + len(schedule.angles)
        assert float(rows[1][1]) == schedule.angles[0, 0]

    def test_safe_name(self):
        assert _safe_name("synth-01") == "synth-01"
        assert _safe_name("a b/c:d") == "a_b_c_d"
