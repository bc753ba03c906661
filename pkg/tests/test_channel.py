import numpy as np
import pytest

from cfthp.channel import (DegenerateModel, complex_normal, conditional_from_errors,
                           conditional_true_channels, corrupt_csit, draw_true_channel,
                           estimate_from_error, select_aps)


class TestDrawTrueChannel:
    def test_unit_variance(self):
        zeta = np.ones((200, 500))
        g = draw_true_channel(zeta, np.random.default_rng(0))
        assert abs(np.mean(np.abs(g) ** 2) - 1.0) < 0.02

    def test_deterministic(self):
        zeta = np.full((4, 3), 0.5)
        g1 = draw_true_channel(zeta, np.random.default_rng(11))
        g2 = draw_true_channel(zeta, np.random.default_rng(11))
        assert np.array_equal(g1, g2)

    def test_zero_mean(self):
        n = 100_000
        g = draw_true_channel(np.ones((n, 1)), np.random.default_rng(1))
        bound = 3.0 / np.sqrt(2 * n)
        assert abs(g.real.mean()) < bound and abs(g.imag.mean()) < bound

    def test_scales_with_zeta(self):
        zeta = np.full((300, 300), 4.0)
        g = draw_true_channel(zeta, np.random.default_rng(2))
        assert abs(np.mean(np.abs(g) ** 2) - 4.0) < 0.08


class TestCorruptCsit:
    def test_perfect_csit_is_identity(self):
        rng = np.random.default_rng(0)
        zeta = np.full((5, 3), 0.7)
        h = complex_normal(rng, zeta.shape)
        g_hat = corrupt_csit(h, zeta, 0.0, rng)
        assert np.array_equal(g_hat, np.sqrt(zeta) * h)

    def test_near_total_error_decorrelates(self):
        rng = np.random.default_rng(5)
        zeta = np.ones((400, 250))
        h = complex_normal(rng, zeta.shape)
        g_hat = corrupt_csit(h, zeta, 0.9999, rng)
        g = np.sqrt(zeta) * h
        corr = np.vdot(g, g_hat) / (np.linalg.norm(g) * np.linalg.norm(g_hat))
        assert abs(corr) < 0.05

    def test_variance_preserved(self):
        rng = np.random.default_rng(6)
        zeta = np.full((400, 250), 2.5)
        h = complex_normal(rng, zeta.shape)
        g_hat = corrupt_csit(h, zeta, 0.15, rng)
        assert abs(np.mean(np.abs(g_hat) ** 2) / 2.5 - 1.0) < 0.02

    def test_rejects_bad_sigma(self):
        with pytest.raises(ValueError):
            corrupt_csit(np.ones((2, 2)), np.ones((2, 2)), 1.0, np.random.default_rng(0))


class TestSelectAps:
    def test_full_cluster_keeps_everything(self):
        rng = np.random.default_rng(1)
        zeta = rng.uniform(0.1, 1.0, (6, 2))
        g_hat = complex_normal(rng, zeta.shape)
        clusters, g_bar = select_aps(g_hat, zeta, 6)
        assert np.array_equal(g_bar, g_hat)
        assert np.array_equal(clusters, np.tile(np.arange(6), (2, 1)))

    def test_top_two_by_value(self):
        zeta = np.array([[3.0], [1.0], [2.0]])
        g_hat = np.arange(3, dtype=complex).reshape(3, 1) + 1.0
        clusters, g_bar = select_aps(g_hat, zeta, 2)
        assert np.array_equal(clusters[0], [0, 2])
        assert g_bar[1, 0] == 0 and g_bar[0, 0] == g_hat[0, 0] and g_bar[2, 0] == g_hat[2, 0]

    def test_ties_break_to_lowest_index(self):
        zeta = np.ones((4, 1))
        g_hat = np.ones((4, 1), dtype=complex)
        clusters, _ = select_aps(g_hat, zeta, 2)
        assert np.array_equal(clusters[0], [0, 1])

    def test_sparsity_pattern(self):
        rng = np.random.default_rng(3)
        zeta = rng.uniform(0.1, 1.0, (12, 3))
        g_hat = complex_normal(rng, zeta.shape)
        clusters, g_bar = select_aps(g_hat, zeta, 5)
        for k in range(3):
            nonzero = np.flatnonzero(g_bar[:, k])
            assert np.array_equal(nonzero, clusters[k])
            assert len(nonzero) == 5

    def test_rejects_bad_cluster_size(self):
        with pytest.raises(ValueError):
            select_aps(np.ones((4, 2), dtype=complex), np.ones((4, 2)), 5)


class TestConditionalTrueChannels:
    def test_perfect_csit_returns_estimate(self):
        rng = np.random.default_rng(0)
        zeta = np.full((6, 2), 0.3)
        g_hat = np.sqrt(zeta) * complex_normal(rng, zeta.shape)
        samples = conditional_true_channels(g_hat, zeta, 0.0, 4, rng)
        assert samples.shape == (4, 6, 2)
        for s in samples:
            np.testing.assert_allclose(s, g_hat, atol=1e-15)

    def test_reconstruction_identity(self):
        rng = np.random.default_rng(8)
        zeta = np.full((5, 3), 0.8)
        sigma_e2 = 0.25
        g_hat = np.sqrt(zeta) * complex_normal(rng, zeta.shape)
        h_err = complex_normal(rng, (10,) + zeta.shape)
        g = conditional_from_errors(g_hat, zeta, sigma_e2, h_err)
        for i in range(10):
            rebuilt = estimate_from_error(g[i] / np.sqrt(zeta), zeta, sigma_e2, h_err[i])
            np.testing.assert_allclose(rebuilt, g_hat, atol=1e-12)

    def test_conditional_variance(self):
        # Var(g | g_hat) = zeta * sigma_e^2 / (1 - sigma_e^2) for the
        # inversion sampler; checked against a direct Monte Carlo estimate.
        rng = np.random.default_rng(9)
        zeta = np.array([[2.0]])
        sigma_e2 = 0.15
        g_hat = np.array([[0.4 + 0.3j]])
        samples = conditional_true_channels(g_hat, zeta, sigma_e2, 200_000, rng)
        var = np.var(samples.real) + np.var(samples.imag)
        expected = 2.0 * sigma_e2 / (1.0 - sigma_e2)
        assert abs(var / expected - 1.0) < 0.02

    def test_conditional_mean(self):
        rng = np.random.default_rng(10)
        zeta = np.array([[1.5]])
        sigma_e2 = 0.2
        g_hat = np.array([[0.5 - 0.2j]])
        samples = conditional_true_channels(g_hat, zeta, sigma_e2, 200_000, rng)
        expected = g_hat[0, 0] / np.sqrt(1.0 - sigma_e2)
        assert abs(samples.mean() - expected) < 0.02

    def test_degenerate_model(self):
        with pytest.raises(DegenerateModel):
            conditional_true_channels(np.ones((2, 2), dtype=complex), np.ones((2, 2)),
                                      1.0, 1, np.random.default_rng(0))

    def test_deterministic(self):
        zeta = np.full((3, 2), 0.4)
        g_hat = np.sqrt(zeta) * complex_normal(np.random.default_rng(1), zeta.shape)
        a = conditional_true_channels(g_hat, zeta, 0.1, 5, np.random.default_rng(2))
        b = conditional_true_channels(g_hat, zeta, 0.1, 5, np.random.default_rng(2))
        assert np.array_equal(a, b)
