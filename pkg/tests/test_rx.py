import math

import numpy as np
import pytest

from gusim.errors import ConfigurationError, RankDeficiencyError
from gusim.rx import (PilotConfig, PowerConfig, channel_covariance,
                      ergodic_capacity, mmse_estimate, noise_power, sum_rate,
                      unitary_pilots, zf_weights)


def random_channel(rng, m, k):
    return (rng.standard_normal((m, k)) + 1j * rng.standard_normal((m, k))) / math.sqrt(2)


class TestNoisePower:
    def test_reference_value(self):
        # 20 MHz, 290 K, 9 dB noise figure
        assert noise_power(20e6, 290.0, 9.0) == pytest.approx(6.362410294494550e-13,
                                                              rel=1e-12)

    def test_unit_noise_figure(self):
        assert noise_power(20e6, 290.0, 0.0) == pytest.approx(
            20e6 * 1.381e-23 * 290.0, rel=1e-15)

    def test_linear_in_bandwidth(self):
        assert noise_power(40e6) == pytest.approx(2 * noise_power(20e6), rel=1e-14)


class TestChannelCovariance:
    def test_single_sample_outer_product(self):
        h = np.array([1.0 + 1j, 2.0 - 1j])
        np.testing.assert_allclose(channel_covariance([h]), np.outer(h, h.conj()))

    def test_hermitian(self):
        rng = np.random.default_rng(0)
        r = channel_covariance([random_channel(rng, 3, 1).ravel() for _ in range(20)])
        np.testing.assert_allclose(r, r.conj().T, atol=1e-14)

    def test_iid_unit_variance_diagonal(self):
        rng = np.random.default_rng(1)
        samples = [random_channel(rng, 4, 1).ravel() for _ in range(10_000)]
        r = channel_covariance(samples)
        np.testing.assert_allclose(np.real(np.diag(r)), 1.0, rtol=0.05)

    def test_empty_rejected(self):
        with pytest.raises(ConfigurationError):
            channel_covariance([])


class TestMmseEstimate:
    def test_scalar_case(self):
        pilot = PilotConfig(matrix=np.array([[1.0 + 0j]]), noise_variance=1.0)
        r = np.array([[1.0 + 0j]])
        y = np.array([[0.8 - 0.4j]])
        est = mmse_estimate(y, pilot, r)
        assert est[0] == pytest.approx((0.8 - 0.4j) / 2.0, abs=1e-14)

    def test_noiseless_limit_inverts_pilots(self):
        rng = np.random.default_rng(3)
        m, k = 2, 2
        phi = random_channel(rng, k, k) + 2 * np.eye(k)
        h = random_channel(rng, m, k)
        y = h @ phi
        a = random_channel(rng, m * k, m * k)
        r = a @ a.conj().T + np.eye(m * k)
        pilot = PilotConfig(matrix=phi, noise_variance=1e-14)
        est = mmse_estimate(y, pilot, r).reshape(m, k, order="F")
        np.testing.assert_allclose(est, h, rtol=1e-5, atol=1e-8)

    def test_matches_normal_equations_oracle(self):
        # independent route: h = (R^-1 + Phi~^H Phi~ / s2)^-1 Phi~^H y / s2
        rng = np.random.default_rng(4)
        for _ in range(25):
            m, k, tau_p = 2, 2, 2
            phi = random_channel(rng, k, tau_p)
            a = random_channel(rng, m * k, m * k)
            r = a @ a.conj().T + 0.5 * np.eye(m * k)
            s2 = 0.3
            y = random_channel(rng, m, tau_p)
            pilot = PilotConfig(matrix=phi, noise_variance=s2)
            est = mmse_estimate(y, pilot, r)
            phi_t = np.kron(phi.T, np.eye(m))
            lhs = np.linalg.inv(r) + phi_t.conj().T @ phi_t / s2
            oracle = np.linalg.solve(lhs, phi_t.conj().T @ y.reshape(-1, order="F") / s2)
            np.testing.assert_allclose(est, oracle, rtol=1e-8, atol=1e-12)

    def test_orthogonality_principle(self):
        # estimation error is uncorrelated with the estimate in the
        # Monte-Carlo average
        rng = np.random.default_rng(5)
        m, k = 2, 2
        n = m * k
        a = random_channel(rng, n, n)
        r = a @ a.conj().T + np.eye(n)
        l = np.linalg.cholesky(r)
        phi = unitary_pilots(k)
        phi_t = np.kron(phi.T, np.eye(m))
        s2 = 0.5
        pilot = PilotConfig(matrix=phi, noise_variance=s2)
        cross = np.zeros((n, n), dtype=complex)
        est_cov = np.zeros((n, n), dtype=complex)
        trials = 10_000
        for _ in range(trials):
            h = l @ random_channel(rng, n, 1).ravel()
            noise = math.sqrt(s2) * random_channel(rng, phi_t.shape[0], 1).ravel()
            y = (phi_t @ h + noise).reshape(m, k, order="F")
            hat = mmse_estimate(y, pilot, r)
            cross += np.outer(h - hat, hat.conj())
            est_cov += np.outer(hat, hat.conj())
        rel = np.linalg.norm(cross) / np.linalg.norm(est_cov)
        assert rel < 0.02

    def test_singular_inner_matrix_reported(self):
        pilot = PilotConfig(matrix=np.zeros((1, 1), dtype=complex), noise_variance=0.0)
        with pytest.raises(RankDeficiencyError):
            mmse_estimate(np.zeros((1, 1)), pilot, np.eye(1, dtype=complex))


class TestZfWeights:
    def test_identity_channel(self):
        w = zf_weights(np.eye(3, dtype=complex)).weights
        np.testing.assert_allclose(w, np.eye(3), atol=1e-12)

    def test_orthogonal_columns(self):
        c = 2.5
        h = np.zeros((4, 2), dtype=complex)
        h[0, 0] = c
        h[2, 1] = 1j * c
        w = zf_weights(h).weights
        np.testing.assert_allclose(w @ h, np.eye(2), atol=1e-12)
        np.testing.assert_allclose(w, h.conj().T / c**2, atol=1e-12)

    def test_random_residual(self):
        rng = np.random.default_rng(6)
        h = random_channel(rng, 8, 3)
        w = zf_weights(h).weights
        assert np.linalg.norm(w @ h - np.eye(3)) < 1e-9

    def test_rank_deficient_raises_with_conditioning(self):
        h = np.ones((4, 2), dtype=complex)
        with pytest.raises(RankDeficiencyError, match="condition"):
            zf_weights(h)

    def test_wide_matrix_rejected(self):
        with pytest.raises(ConfigurationError):
            zf_weights(np.ones((2, 3), dtype=complex))


class TestSumRate:
    def test_paper_literal_perfect_zf(self):
        rng = np.random.default_rng(7)
        h = random_channel(rng, 8, 3)
        w = zf_weights(h)
        power = PowerConfig(6.0, 3, 1e-3)
        rate = sum_rate(h, w, power, mode="paper-literal")
        assert rate == pytest.approx(3 * math.log2(1 + 2.0), rel=1e-9)

    def test_zero_power(self):
        h = np.eye(2, dtype=complex)
        power = PowerConfig(0.0, 2, 1.0)
        assert sum_rate(h, zf_weights(h), power) == 0.0

    def test_physical_identity_unit_sinr(self):
        h = np.eye(4, dtype=complex)
        power = PowerConfig(4.0, 4, 1.0)
        assert sum_rate(h, zf_weights(h), power, mode="physical") == pytest.approx(4.0,
                                                                                  rel=1e-12)

    @pytest.mark.parametrize("mode", ["physical", "paper-literal"])
    def test_nondecreasing_in_power(self, mode):
        rng = np.random.default_rng(8)
        h = random_channel(rng, 8, 4)
        w = zf_weights(h)
        rates = [sum_rate(h, w, PowerConfig(p, 4, 1e-2), mode=mode)
                 for p in [0.1, 0.5, 1.0, 5.0, 20.0]]
        assert all(a <= b + 1e-12 for a, b in zip(rates, rates[1:]))


class TestErgodicCapacity:
    def test_zero_power(self):
        h = np.eye(2, dtype=complex)
        assert ergodic_capacity([h], PowerConfig(0.0, 2, 1.0)) == 0.0

    def test_scaled_identity_gram(self):
        p_n = 2.0
        h = math.sqrt(p_n) * np.eye(3, dtype=complex)
        cap = ergodic_capacity([h], PowerConfig(6.0, 3, p_n))
        assert cap == pytest.approx(3 * math.log2(1 + 2.0), rel=1e-12)

    def test_dominates_zf_sum_rate(self):
        rng = np.random.default_rng(9)
        power = PowerConfig(4.0, 4, 1e-2)
        for _ in range(100):
            h = random_channel(rng, 8, 4)
            cap = ergodic_capacity([h], power)
            rate = sum_rate(h, zf_weights(h), power, mode="physical")
            assert cap >= rate - 1e-9

    def test_empty_rejected(self):
        with pytest.raises(ConfigurationError):
            ergodic_capacity([], PowerConfig(1.0, 1, 1.0))
