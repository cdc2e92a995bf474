"""Seeded streams and time distributions."""

import numpy as np
import pytest

from flowplan.streams import TIME_EPS, TimeSampler, restore_rng, rng_state, seeded


class TestSeededStreams:
    def test_same_labels_same_sequence(self):
        a = seeded(123, "train").normal(size=16)
        b = seeded(123, "train").normal(size=16)
        np.testing.assert_array_equal(a, b)

    def test_different_labels_differ(self):
        a = seeded(123, "train").normal(size=16)
        b = seeded(123, "eval").normal(size=16)
        assert not np.allclose(a, b)

    def test_integer_labels(self):
        a = seeded(5, "episode", 3).uniform(size=4)
        b = seeded(5, "episode", 4).uniform(size=4)
        assert not np.allclose(a, b)

    def test_state_round_trip(self):
        rng = seeded(9, "x")
        rng.normal(size=10)
        snap = rng_state(rng)
        tail1 = rng.normal(size=5)
        tail2 = restore_rng(snap).normal(size=5)
        np.testing.assert_array_equal(tail1, tail2)


class TestTimeSampler:
    def test_logit_normal_linear_at_mean(self):
        s = TimeSampler(kind="logit_normal", path_kind="linear")
        t = s.map_normal(np.array([-0.4]))
        assert t[0] == pytest.approx(1.0 / (1.0 + np.exp(0.4)), abs=1e-12)
        assert t[0] == pytest.approx(0.40131, abs=1e-5)

    def test_trig_arc_time_at_zero(self):
        s = TimeSampler(kind="logit_normal", path_kind="trig", sigma_d=1.0)
        t = s.map_normal(np.array([0.0]))
        assert t[0] == pytest.approx(np.pi / 4, abs=1e-12)

    def test_uniform_linear_mean(self):
        s = TimeSampler(kind="uniform", path_kind="linear")
        t = s.sample(seeded(0, "mc"), 100_000)
        assert abs(t.mean() - 0.5) < 0.01

    def test_uniform_over_trig_domain_permitted(self):
        s = TimeSampler(kind="uniform", path_kind="trig")
        t = s.sample(seeded(1, "mc"), 10_000)
        assert t.min() >= TIME_EPS and t.max() <= np.pi / 2 - TIME_EPS

    @pytest.mark.parametrize("kind", ["uniform", "logit_normal"])
    @pytest.mark.parametrize("path_kind", ["linear", "trig"])
    def test_strictly_inside_open_domain(self, kind, path_kind):
        s = TimeSampler(kind=kind, path_kind=path_kind, p_std=4.0)
        t = s.sample(seeded(2, kind, path_kind), 50_000)
        t_max = 1.0 if path_kind == "linear" else np.pi / 2
        assert np.all(t > 0.0) and np.all(t < t_max)
        assert np.all(t >= TIME_EPS) and np.all(t <= t_max - TIME_EPS)

    def test_sigma_d_shifts_trig_times(self):
        lo = TimeSampler(kind="logit_normal", path_kind="trig", sigma_d=0.5)
        hi = TimeSampler(kind="logit_normal", path_kind="trig", sigma_d=2.0)
        n = np.zeros(1)
        assert lo.map_normal(n)[0] > hi.map_normal(n)[0]

    def test_bad_config_rejected(self):
        with pytest.raises(ValueError):
            TimeSampler(kind="gamma")
        with pytest.raises(ValueError):
            TimeSampler(p_std=0.0)
        with pytest.raises(ValueError):
            TimeSampler(sigma_d=-1.0)

    def test_count_must_be_positive(self):
        with pytest.raises(ValueError):
            TimeSampler().sample(seeded(0), 0)
