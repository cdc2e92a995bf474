"""Interpolant path identities."""

import numpy as np
import pytest

from flowplan.paths import LinearPath, TrigPath, make_path
from flowplan.streams import TIME_EPS

SQRT2_OVER_2 = np.sqrt(2.0) / 2.0


class TestGammaAlpha:
    def test_linear_boundaries(self):
        p = LinearPath()
        assert p.gamma_alpha(0.0) == (1.0, 0.0)
        g, a = p.gamma_alpha(1.0)
        assert (g, a) == (0.0, 1.0)

    def test_trig_boundary(self):
        p = TrigPath()
        g, a = p.gamma_alpha(np.pi / 2)
        assert g == pytest.approx(0.0, abs=1e-15)
        assert a == pytest.approx(1.0)

    def test_trig_quarter(self):
        g, a = TrigPath().gamma_alpha(np.pi / 4)
        assert g == pytest.approx(SQRT2_OVER_2)
        assert a == pytest.approx(SQRT2_OVER_2)

    def test_unit_circle_identity_dense_grid(self):
        p = TrigPath(sigma_d=1.7)
        t = np.linspace(0.0, np.pi / 2, 2001)
        g, a = p.gamma_alpha(t)
        np.testing.assert_allclose(g**2 + a**2, 1.0, atol=1e-12)

    def test_domain_error(self):
        with pytest.raises(ValueError):
            LinearPath().gamma_alpha(1.5)
        with pytest.raises(ValueError):
            TrigPath().gamma_alpha(-0.1)


class TestInterpolate:
    def test_linear_near_data_end(self):
        p = LinearPath()
        x, z = np.array([1.0, -2.0]), np.array([3.0, 5.0])
        out = p.interpolate(x, z, TIME_EPS)
        assert np.max(np.abs(out - x)) < 10 * TIME_EPS

    def test_linear_midpoint(self):
        out = LinearPath().interpolate(np.array([1.0]), np.array([3.0]), 0.5)
        np.testing.assert_allclose(out, [2.0])

    def test_trig_quarter_turn(self):
        out = TrigPath().interpolate(np.array([1.0, 0.0]), np.array([0.0, 1.0]), np.pi / 4)
        np.testing.assert_allclose(out, [SQRT2_OVER_2, SQRT2_OVER_2], atol=1e-15)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            LinearPath().interpolate(np.zeros(3), np.zeros(2), 0.5)

    @pytest.mark.parametrize("kind", ["linear", "trig"])
    def test_boundary_recovery(self, kind):
        p = make_path(kind, sigma_d=1.3)
        rng = np.random.default_rng(0)
        x = rng.normal(size=(8, 4))
        z = rng.normal(scale=p.noise_scale(), size=(8, 4))
        near_data = p.interpolate(x, z, p.t_min + TIME_EPS)
        near_noise = p.interpolate(x, z, p.t_max - TIME_EPS)
        scale = np.max(np.abs(np.concatenate([x, z])))
        assert np.max(np.abs(near_data - x)) < 10 * TIME_EPS * scale
        assert np.max(np.abs(near_noise - z)) < 10 * TIME_EPS * scale


class TestVelocityTarget:
    def test_linear_constant_in_time(self):
        p = LinearPath()
        x, z = np.array([1.0]), np.array([3.0])
        for t in [0.05, 0.3, 0.77, 0.95]:
            np.testing.assert_allclose(p.velocity_target(x, z, t), [2.0])

    def test_trig_at_zero(self):
        out = TrigPath().velocity_target(np.array([1.0]), np.array([3.0]), 0.0)
        np.testing.assert_allclose(out, [3.0])

    def test_trig_quarter(self):
        out = TrigPath().velocity_target(np.array([2.0]), np.array([0.0]), np.pi / 4)
        np.testing.assert_allclose(out, [-np.sqrt(2.0)], atol=1e-15)

    @pytest.mark.parametrize("kind", ["linear", "trig"])
    def test_finite_difference_consistency(self, kind):
        p = make_path(kind, sigma_d=0.8)
        rng = np.random.default_rng(1)
        x = rng.normal(size=(16, 3))
        z = rng.normal(scale=p.noise_scale(), size=(16, 3))
        h = 1e-4
        for t in np.linspace(0.05, p.t_max - 0.05, 9):
            fd = (p.interpolate(x, z, t + h) - p.interpolate(x, z, t - h)) / (2 * h)
            v = p.velocity_target(x, z, t)
            scale = max(1.0, np.max(np.abs(v)))
            tol = 1e-12 if kind == "linear" else 1e-6
            assert np.max(np.abs(fd - v)) / scale < tol


class TestConditioningTransforms:
    def test_c_noise_identity_default(self):
        assert TrigPath().c_noise(0.3) == pytest.approx(0.3)
        assert LinearPath().c_noise(0.9) == pytest.approx(0.9)
        assert TrigPath().c_noise(np.pi / 4) == pytest.approx(np.pi / 4)

    def test_c_noise_hook(self):
        p = TrigPath(c_noise=lambda t: 2.0 * t)
        assert p.c_noise(0.25) == pytest.approx(0.5)

    def test_model_input_scale(self):
        np.testing.assert_allclose(TrigPath(sigma_d=2.0).model_input_scale(np.array([4.0])), [2.0])
        np.testing.assert_allclose(LinearPath().model_input_scale(np.array([4.0])), [4.0])
        np.testing.assert_allclose(
            TrigPath(sigma_d=1.0).model_input_scale(np.array([0.5, -0.5])), [0.5, -0.5]
        )

    def test_noise_scale(self):
        assert TrigPath(sigma_d=2.5).noise_scale() == 2.5
        assert LinearPath().noise_scale() == 1.0


def test_make_path_rejects_unknown():
    with pytest.raises(ValueError):
        make_path("cosine")


def test_batched_times_broadcast_per_row():
    p = TrigPath()
    x = np.ones((3, 2))
    z = np.zeros((3, 2))
    t = np.array([0.0, np.pi / 4, np.pi / 2])
    out = p.interpolate(x, z, t)
    np.testing.assert_allclose(out[:, 0], [1.0, SQRT2_OVER_2, 0.0], atol=1e-15)
