"""ML offset estimation: objective, grid-plus-refinement search, channel recovery."""

import numpy as np
import pytest

from beamsync import (
    EstimatorConfig,
    ReceivedBlock,
    SyncLinkState,
    estimate_effective_channel,
    estimate_offset,
    genie_beam_direction,
    make_sync_signal,
    ml_objective,
    ml_objective_grid,
    rayleigh_channel,
    stage2_receive,
)
from beamsync.protocol import SECONDARY_SIDE


def noiseless_block(mp=4, ms=4, delta=0.1, rho=4.0, n=100, seed=0):
    g = rayleigh_channel(mp, ms, np.random.default_rng(seed))
    link = SyncLinkState(true_offset=delta, snr=rho, channel=g)
    beam = genie_beam_direction(g)
    x = make_sync_signal(n, 4)
    ys = stage2_receive(link, beam, x, np.random.default_rng(1), noise_scale=0.0)
    b = g.entries.T @ beam.weights
    return ys, x, b


def noisy_block(mp=4, ms=4, delta=0.1, rho=4.0, n=100, seed=0):
    g = rayleigh_channel(mp, ms, np.random.default_rng(seed))
    link = SyncLinkState(true_offset=delta, snr=rho, channel=g)
    beam = genie_beam_direction(g)
    x = make_sync_signal(n, 4)
    ys = stage2_receive(link, beam, x, np.random.default_rng(seed + 1000))
    return ys, x


class TestMlObjective:
    def test_noiseless_peak_value(self):
        # at the true offset the rotations cancel: value is rho ||b||^2 ||x||^4
        ys, x, b = noiseless_block(delta=0.1234, rho=2.0)
        value = ml_objective(ys, x, 0.1234)
        expected = 2.0 * np.linalg.norm(b) ** 2 * x.energy ** 2
        assert value == pytest.approx(expected, rel=1e-10)

    def test_zero_block_is_flat_zero(self):
        x = make_sync_signal(50, 4)
        ys = ReceivedBlock(entries=np.zeros((3, 50), dtype=complex), snr=1.0,
                           side=SECONDARY_SIDE)
        for delta in (-0.4, 0.0, 0.2):
            assert ml_objective(ys, x, delta) == 0.0

    def test_periodicity(self):
        ys, x = noisy_block(seed=3)
        for delta in (-0.31, 0.07, 0.44):
            assert ml_objective(ys, x, delta) == pytest.approx(
                ml_objective(ys, x, delta + 1.0), rel=1e-9)

    def test_grid_matches_scalar_calls(self):
        ys, x = noisy_block(seed=4)
        deltas = np.linspace(-0.5, 0.5, 37)
        grid = ml_objective_grid(ys, x, deltas)
        scalar = np.array([ml_objective(ys, x, d) for d in deltas])
        assert np.allclose(grid, scalar, rtol=1e-12)

    def test_rejects_length_mismatch(self):
        ys, _ = noisy_block(n=100)
        with pytest.raises(ValueError):
            ml_objective(ys, make_sync_signal(64, 4), 0.0)


class TestEstimateOffset:
    def test_noiseless_recovery(self):
        ys, x, _ = noiseless_block(mp=4, ms=4, delta=0.1234, n=100)
        est = estimate_offset(ys, x)
        assert est.valid
        assert abs(est.delta_hat - 0.1234) < 1e-9

    def test_high_snr_near_zero_offset(self):
        ys, x = noisy_block(mp=4, ms=4, delta=0.0, rho=1e6, seed=8)
        est = estimate_offset(ys, x)
        assert abs(est.delta_hat) < 1e-5

    def test_matches_megapoint_brute_force(self):
        # oracle: dense 1e6-point scan; agreement within one oracle grid step
        ys, x = noisy_block(mp=4, ms=4, delta=-0.217, rho=3.0, seed=12)
        est = estimate_offset(ys, x)
        dense = np.linspace(-0.5, 0.5, 1_000_000, endpoint=False)
        values = ml_objective_grid(ys, x, dense)
        best = dense[int(np.argmax(values))]
        assert abs(est.delta_hat - best) < 1e-6

    def test_degenerate_block_flagged_invalid(self):
        x = make_sync_signal(20, 2)
        ys = ReceivedBlock(entries=np.zeros((2, 20), dtype=complex), snr=1.0,
                           side=SECONDARY_SIDE)
        est = estimate_offset(ys, x)
        assert not est.valid
        assert est.objective_value == 0.0

    def test_grid_spacing_validation(self):
        ys, x = noisy_block(n=100)
        with pytest.raises(ValueError):
            estimate_offset(ys, x, EstimatorConfig(coarse_grid_points=100))

    def test_restricted_search_window(self):
        ys, x, _ = noiseless_block(delta=0.05)
        est = estimate_offset(ys, x, EstimatorConfig(search_halfwidth=0.2))
        assert abs(est.delta_hat - 0.05) < 1e-9
        assert abs(est.delta_hat) <= 0.2


class TestEffectiveChannel:
    def test_noiseless_exact_recovery(self):
        ys, x, b = noiseless_block(delta=0.21, rho=5.0)
        b_hat = estimate_effective_channel(ys, x, 0.21, 5.0)
        assert np.max(np.abs(b_hat - b)) < 1e-10

    def test_zero_block_gives_zero(self):
        x = make_sync_signal(30, 3)
        ys = ReceivedBlock(entries=np.zeros((2, 30), dtype=complex), snr=4.0,
                           side=SECONDARY_SIDE)
        assert np.all(estimate_effective_channel(ys, x, 0.1, 4.0) == 0.0)

    def test_matches_dense_matrix_expression(self):
        # oracle: independently coded dense rotation and matched filter
        ys, x = noisy_block(mp=3, ms=3, seed=21)
        delta = 0.04
        n = np.arange(1, x.length + 1)
        dense_rot = np.diag(np.exp(2j * np.pi * n * delta))
        expected = ys.entries @ dense_rot @ x.samples / (np.sqrt(ys.snr) * x.energy)
        got = estimate_effective_channel(ys, x, delta, ys.snr)
        assert np.allclose(got, expected, atol=1e-13)

    def test_rejects_bad_rho(self):
        ys, x = noisy_block()
        with pytest.raises(ValueError):
            estimate_effective_channel(ys, x, 0.0, 0.0)


class TestEstimatorInvariants:
    @pytest.mark.parametrize("seed,delta,rho", [(0, 0.31, 0.5), (1, -0.42, 8.0),
                                                (2, 0.07, 100.0), (3, -0.003, 1.0)])
    def test_noiseless_exactness_offset_and_channel(self, seed, delta, rho):
        ys, x, b = noiseless_block(mp=5, ms=3, delta=delta, rho=rho, seed=seed)
        est = estimate_offset(ys, x)
        assert abs(est.delta_hat - delta) < 1e-9
        assert np.max(np.abs(est.b_hat - b)) < 1e-8

    def test_global_peak_capture_against_dense_grid(self):
        rng = np.random.default_rng(31)
        dense = np.linspace(-0.5, 0.5, 100_000, endpoint=False)
        for seed in range(5):
            ys, x = noisy_block(mp=2, ms=2, delta=float(rng.uniform(-0.45, 0.45)),
                                rho=2.0, n=50, seed=seed + 40)
            est = estimate_offset(ys, x)
            best_dense = np.max(ml_objective_grid(ys, x, dense))
            assert est.objective_value >= best_dense - 1e-9

    def test_scale_equivariance(self):
        ys, x = noisy_block(seed=50)
        est1 = estimate_offset(ys, x)
        scaled = ReceivedBlock(entries=3.0 * ys.entries, snr=ys.snr, side=ys.side)
        est2 = estimate_offset(scaled, x)
        assert abs(est2.delta_hat - est1.delta_hat) < 1e-8
        assert np.allclose(est2.b_hat, 3.0 * est1.b_hat, rtol=1e-9)

    def test_longer_burst_improves_rmse(self):
        # doubling N strictly lowers the error spread at fixed SNR
        rho = 0.5
        trials = 500
        errors = {}
        for n in (100, 200):
            x = make_sync_signal(n, 4)
            sq = np.empty(trials)
            for t in range(trials):
                rng = np.random.default_rng([n, t])
                g = rayleigh_channel(2, 2, rng)
                link = SyncLinkState(true_offset=0.05, snr=rho, channel=g)
                ys = stage2_receive(link, genie_beam_direction(g), x, rng)
                est = estimate_offset(ys, x)
                sq[t] = (est.delta_hat - 0.05) ** 2
            errors[n] = np.sqrt(np.mean(sq))
        assert errors[200] < errors[100]
