"""Fisher information assembly and the two routes to the offset bound."""

import numpy as np
import pytest

from beamsync import (
    IdentifiabilityError,
    SyncWaveform,
    crb_closed_form,
    crb_numerical,
    fim_single,
    fim_total,
    genie_beam_direction,
    make_sync_signal,
    rayleigh_channel,
)


def random_b(ms, seed):
    rng = np.random.default_rng(seed)
    return rng.standard_normal(ms) + 1j * rng.standard_normal(ms)


class TestFimSingle:
    def test_zero_sample_gives_zero_matrix(self):
        info = fim_single(3, 0.0, random_b(2, 0), 1.0)
        assert np.all(info.matrix == 0.0)

    def test_zero_channel_structure(self):
        info = fim_single(2, 1.0, np.zeros(2, dtype=complex), 1.0)
        mat = info.matrix
        assert mat[-1, -1] == 0.0
        assert np.all(mat[:-1, -1] == 0.0)
        assert np.all(mat[-1, :-1] == 0.0)
        assert np.allclose(mat[:-1, :-1], 2.0 * np.eye(4))

    def test_hand_substitution_scalar_channel(self):
        # Ms=1, b=1, n=1, x=1, rho=1: corner element is 2 * 4 pi^2 = 8 pi^2
        info = fim_single(1, 1.0, np.array([1.0 + 0.0j]), 1.0)
        mat = info.matrix
        assert mat.shape == (3, 3)
        assert mat[2, 2] == pytest.approx(8.0 * np.pi ** 2, rel=1e-14)
        assert np.allclose(mat[:2, :2], 2.0 * np.eye(2))
        # b imaginary part is zero, so the b_R/delta coupling sits in row 2
        assert mat[0, 2] == 0.0
        assert mat[1, 2] == pytest.approx(-4.0 * np.pi, rel=1e-14)

    def test_symmetry_and_psd(self):
        info = fim_single(5, 0.7, random_b(3, 1), 2.5)
        assert np.max(np.abs(info.matrix - info.matrix.T)) < 1e-10
        assert np.min(np.linalg.eigvalsh(info.matrix)) > -1e-10

    def test_rejects_bad_instant(self):
        with pytest.raises(ValueError):
            fim_single(0, 1.0, random_b(1, 0), 1.0)


class TestFimTotal:
    def test_zero_waveform_gives_zero(self):
        x = SyncWaveform(samples=np.zeros(8), cycles=1)
        info = fim_total(x, random_b(2, 2), 1.0)
        assert np.all(info.matrix == 0.0)

    def test_matches_loop_free_dense_oracle(self):
        # oracle: closed-form block assembly with vectorized weighted sums
        x = make_sync_signal(12, 1)
        b = random_b(2, 3)
        rho = 1.7
        info = fim_total(x, b, rho)

        n = np.arange(1, 13, dtype=float)
        x2 = x.samples ** 2
        s0, s1, s2 = x2.sum(), np.dot(n, x2), np.dot(n * n, x2)
        ms = 2
        expected = np.zeros((5, 5))
        expected[:2 * ms, :2 * ms] = 2 * rho * s0 * np.eye(2 * ms)
        col = 2 * rho * 2 * np.pi * s1 * np.concatenate([b.imag, -b.real])
        expected[:2 * ms, -1] = col
        expected[-1, :2 * ms] = col
        expected[-1, -1] = 2 * rho * 4 * np.pi ** 2 * s2 * np.sum(np.abs(b) ** 2)
        assert np.allclose(info.matrix, expected, rtol=1e-12)

    def test_single_sample_burst_cannot_exist(self):
        # N = 1 is unidentifiable; the waveform type refuses to represent it
        with pytest.raises(ValueError):
            SyncWaveform(samples=np.array([1.0]), cycles=1)


class TestClosedForm:
    def test_hand_evaluated_all_ones(self):
        # x = [1, 1], rho = 1, |b|^2 = 1:
        #   sum n^2 x^2 = 5, (sum n x^2)^2 / sum x^2 = 4.5, CRB = 1/(4 pi^2)
        x = SyncWaveform(samples=np.ones(2), cycles=1)
        value = crb_closed_form(x, np.array([1.0 + 0j]), 1.0)
        assert value == pytest.approx(1.0 / (4.0 * np.pi ** 2), rel=1e-12)
        assert value == pytest.approx(0.025330, rel=1e-4)

    def test_rho_scaling(self):
        x = make_sync_signal(50, 4)
        b = random_b(3, 4)
        assert crb_closed_form(x, b, 2.0) == pytest.approx(
            crb_closed_form(x, b, 1.0) / 2.0, rel=1e-12)

    def test_channel_energy_scaling(self):
        x = make_sync_signal(50, 4)
        b = random_b(3, 5)
        assert crb_closed_form(x, np.sqrt(2.0) * b, 1.0) == pytest.approx(
            crb_closed_form(x, b, 1.0) / 2.0, rel=1e-12)

    def test_phase_invariance(self):
        x = make_sync_signal(40, 4)
        b = random_b(4, 6)
        rotated = b * np.exp(1j * 1.234)
        assert crb_closed_form(x, rotated, 3.0) == pytest.approx(
            crb_closed_form(x, b, 3.0), rel=1e-12)

    def test_impulse_waveform_unidentifiable(self):
        x = SyncWaveform(samples=np.array([1.0, 0.0, 0.0]), cycles=1)
        with pytest.raises(IdentifiabilityError):
            crb_closed_form(x, np.array([1.0 + 0j]), 1.0)

    def test_zero_channel_unidentifiable(self):
        x = make_sync_signal(10, 1)
        with pytest.raises(IdentifiabilityError):
            crb_closed_form(x, np.zeros(2, dtype=complex), 1.0)

    def test_longer_burst_strictly_tightens_bound(self):
        b = random_b(2, 7)
        values = [crb_closed_form(make_sync_signal(n, 4), b, 1.0)
                  for n in (50, 100, 200)]
        assert values[0] > values[1] > values[2]


class TestNumericalAgainstClosedForm:
    @pytest.mark.parametrize("ms", [1, 2, 4, 16])
    def test_mutual_oracle(self, ms):
        rng = np.random.default_rng(ms)
        for case in range(5):
            n = int(rng.choice([2, 10, 100]))
            x = make_sync_signal(n, 0.8 if n == 2 else 4)
            b = rng.standard_normal(ms) + 1j * rng.standard_normal(ms)
            rho = float(10.0 ** rng.uniform(-2, 2))
            closed = crb_closed_form(x, b, rho)
            numeric = crb_numerical(x, b, rho)
            assert abs(numeric - closed) / closed < 1e-9

    def test_zero_channel_is_singular(self):
        x = make_sync_signal(10, 1)
        with pytest.raises(IdentifiabilityError):
            crb_numerical(x, np.zeros(3, dtype=complex), 1.0)

    def test_genie_beam_minimizes_bound(self):
        rng = np.random.default_rng(9)
        x = make_sync_signal(100, 4)
        for seed in range(10):
            g = rayleigh_channel(6, 6, np.random.default_rng(seed))
            b_genie = g.entries.T @ genie_beam_direction(g).weights
            bound_genie = crb_closed_form(x, b_genie, 1.0)
            for _ in range(20):
                w = rng.standard_normal(6) + 1j * rng.standard_normal(6)
                w /= np.linalg.norm(w)
                bound_probe = crb_closed_form(x, g.entries.T @ w, 1.0)
                assert bound_genie <= bound_probe + 1e-15
