"""Trial orchestration, sweeps, schedules, and the drift timeline."""

import numpy as np
import pytest

from beamsync import (
    ExperimentConfig,
    OffsetModel,
    circular_offset_error,
    run_multi_panel_schedule,
    run_sweep,
    run_trial,
    simulate_drift_timeline,
    trial_rng,
)
from beamsync.config import ChannelSpec, DriftSpec


def small_cfg(**overrides):
    base = dict(mp=2, ms=2, n=50, trials=20, snr_grid_db=(10.0,),
                schemes=("BeamSyncGenie",), master_seed=99)
    base.update(overrides)
    return ExperimentConfig(**base)


class TestCircularError:
    def test_plain_difference(self):
        assert circular_offset_error(0.12, 0.10) == pytest.approx(0.02)

    def test_wraps_across_half(self):
        # -0.49 and +0.49 are 0.02 apart on the offset circle, not 0.98
        assert circular_offset_error(-0.49, 0.49) == pytest.approx(0.02)
        assert circular_offset_error(0.49, -0.49) == pytest.approx(-0.02)


class TestRunTrial:
    def test_noiseless_genie_round(self):
        cfg = small_cfg(noise_scale=0.0, offset=OffsetModel(kind="fixed", value=0.08))
        rng = trial_rng(cfg.master_seed, "BeamSyncGenie", 0, 0)
        res = run_trial(cfg, "BeamSyncGenie", 10.0, rng)
        assert res.squared_error < cfg.estimator.refine_tolerance ** 2
        assert res.beam_alignment == pytest.approx(1.0)
        assert res.valid

    def test_bit_identical_for_same_stream(self):
        cfg = small_cfg(schemes=("BeamSync",))
        r1 = run_trial(cfg, "BeamSync", 10.0, trial_rng(cfg.master_seed, "BeamSync", 0, 3))
        r2 = run_trial(cfg, "BeamSync", 10.0, trial_rng(cfg.master_seed, "BeamSync", 0, 3))
        assert r1 == r2

    def test_distinct_trials_differ(self):
        cfg = small_cfg(schemes=("BeamSync",))
        r1 = run_trial(cfg, "BeamSync", 10.0, trial_rng(cfg.master_seed, "BeamSync", 0, 0))
        r2 = run_trial(cfg, "BeamSync", 10.0, trial_rng(cfg.master_seed, "BeamSync", 0, 1))
        assert r1.delta_true != r2.delta_true

    def test_high_snr_beam_alignment(self):
        cfg = ExperimentConfig(mp=8, ms=8, n=50, trials=1, snr_grid_db=(60.0,),
                               schemes=("BeamSync",), master_seed=5)
        for t in range(5):
            rng = trial_rng(cfg.master_seed, "BeamSync", 0, t)
            res = run_trial(cfg, "BeamSync", 1e6, rng)
            assert res.beam_alignment >= 0.999

    def test_all_schemes_run(self):
        cfg = small_cfg(schemes=("BeamSync", "BeamSyncGenie", "Analog", "AnalogGenie"))
        for scheme in cfg.schemes:
            rng = trial_rng(cfg.master_seed, scheme, 0, 0)
            res = run_trial(cfg, scheme, 10.0, rng)
            assert res.valid
            assert 0.0 <= res.beam_alignment <= 1.0 + 1e-12
            assert res.crb > 0


class TestRunSweep:
    def test_single_cell_curve(self):
        cfg = small_cfg(trials=1)
        curve = run_sweep(cfg)
        assert len(curve.points) == 1
        p = curve.points[0]
        assert p.scheme == "BeamSyncGenie"
        assert p.trials == 1
        assert p.rmse >= 0

    def test_genie_tracks_crb_at_clean_snr(self):
        cfg = small_cfg(mp=8, ms=8, trials=100, snr_grid_db=(10.0,))
        p = run_sweep(cfg).points[0]
        assert p.rmse < 2.0 * p.crb_sqrt_avg
        assert p.rmse > 0.5 * p.crb_sqrt_avg

    def test_worker_count_does_not_change_bytes(self):
        cfg = small_cfg(trials=10, snr_grid_db=(0.0, 10.0),
                        schemes=("BeamSync", "BeamSyncGenie"))
        serial = run_sweep(cfg, workers=1)
        pooled = run_sweep(cfg, workers=2)
        assert serial.to_csv_text() == pooled.to_csv_text()
        assert serial.config_sha == pooled.config_sha

    def test_csv_schema(self):
        cfg = small_cfg(trials=2)
        text = run_sweep(cfg).to_csv_text()
        lines = text.strip().split("\n")
        assert lines[0] == "scheme,snr_db,trials,rmse,crb_sqrt_avg"
        cells = lines[1].split(",")
        assert cells[0] == "BeamSyncGenie"
        assert float(cells[1]) == 10.0
        assert int(cells[2]) == 2

    def test_los_sweep_runs(self):
        cfg = small_cfg(mp=4, ms=4, trials=5, channel=ChannelSpec(model="los"))
        p = run_sweep(cfg).points[0]
        assert np.isfinite(p.rmse)


class TestMultiPanelSchedule:
    def test_single_panel(self):
        cfg = small_cfg(noise_scale=0.0)
        results = run_multi_panel_schedule(cfg, 1, np.random.default_rng(1))
        assert len(results) == 1
        r = results[0]
        assert r.residual == pytest.approx(
            circular_offset_error(r.delta_true, r.estimate.delta_hat))

    def test_noiseless_residuals_vanish(self):
        cfg = small_cfg(noise_scale=0.0)
        results = run_multi_panel_schedule(cfg, 3, np.random.default_rng(2))
        for r in results:
            assert abs(r.residual) < cfg.estimator.refine_tolerance

    def test_each_panel_matches_its_own_offset(self):
        cfg = small_cfg(snr_grid_db=(30.0,))
        results = run_multi_panel_schedule(cfg, 2, np.random.default_rng(3))
        a, b = results
        assert a.delta_true != b.delta_true
        assert abs(a.estimate.delta_hat - a.delta_true) < 1e-3
        assert abs(b.estimate.delta_hat - b.delta_true) < 1e-3
        # cross-pairing would be far off
        assert abs(a.estimate.delta_hat - b.delta_true) > 1e-2


class TestDriftTimeline:
    def test_zero_drift_only_cold_start(self):
        cfg = small_cfg(drift=DriftSpec(drift_rate=0.0, resync_threshold=1e-3,
                                        slots=50, snr_db=20.0))
        timeline = simulate_drift_timeline(cfg, 0.0, 1e-3, 50, np.random.default_rng(4))
        assert timeline.sync_count == 1
        assert timeline.sync_slots == [0]
        assert len(timeline.rows) == 50

    def test_infinite_threshold_only_cold_start(self):
        cfg = small_cfg()
        timeline = simulate_drift_timeline(cfg, 1e-4, np.inf, 100,
                                           np.random.default_rng(5))
        assert timeline.sync_count == 1

    def test_resync_interval_matches_hitting_time_oracle(self):
        rate, threshold, slots = 1e-5, 1e-3, 4000
        cfg = small_cfg(drift=DriftSpec(drift_rate=rate, resync_threshold=threshold,
                                        slots=slots, snr_db=20.0))
        timeline = simulate_drift_timeline(cfg, rate, threshold, slots,
                                           np.random.default_rng(6))
        syncs = timeline.sync_slots
        assert len(syncs) > 10
        intervals = np.diff(syncs)
        mean_interval = intervals.mean()

        # oracle: direct hitting-time simulation of the same drift walk
        oracle_rng = np.random.default_rng(1234)
        oracle_hits = []
        for _ in range(200):
            resid, steps = 0.0, 0
            while abs(resid) <= threshold:
                resid += oracle_rng.normal(rate, 0.25 * rate)
                steps += 1
            oracle_hits.append(steps)
        oracle_mean = np.mean(oracle_hits)
        assert mean_interval == pytest.approx(oracle_mean, rel=0.2)
        assert mean_interval == pytest.approx(threshold / rate, rel=0.3)

    def test_csv_schema(self):
        cfg = small_cfg()
        timeline = simulate_drift_timeline(cfg, 0.0, 1e-3, 3, np.random.default_rng(7))
        lines = timeline.to_csv_text().strip().split("\n")
        assert lines[0] == "slot,residual,event"
        assert lines[1].endswith(",sync")
        assert len(lines) == 4
