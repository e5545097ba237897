import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sensetrack.geometry import (
    DiagonalGaussian,
    ZeroVectorError,
    angle_diff,
    from_nsphere,
    gaussian_noise,
    kl_divergence,
    mahalanobis,
    to_nsphere,
    to_nsphere_batch,
    wrap_to_pi,
)


class TestToNsphere:
    def test_d2_x_axis(self):
        assert np.allclose(to_nsphere(np.array([1.0, 0.0])), [0.0])

    def test_d2_y_axis(self):
        assert np.allclose(to_nsphere(np.array([0.0, 1.0])), [math.pi / 2])

    def test_d3_pole_convention(self):
        # both angles pinned at 0 at the pole, deterministically
        assert np.allclose(to_nsphere(np.array([0.0, 0.0, 1.0])), [0.0, 0.0])

    def test_zero_vector_rejected(self):
        with pytest.raises(ZeroVectorError):
            to_nsphere(np.zeros(4))

    def test_scale_invariance(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            v = rng.normal(size=8)
            a = to_nsphere(v)
            assert np.array_equal(a, to_nsphere(2.0 * v))
            assert np.array_equal(a, to_nsphere(0.5 * v))

    def test_ranges(self):
        rng = np.random.default_rng(1)
        for _ in range(200):
            a = to_nsphere(rng.normal(size=6))
            assert np.all(a[:-1] >= 0) and np.all(a[:-1] <= math.pi)
            assert 0 <= a[-1] < 2 * math.pi

    def test_round_trip(self):
        rng = np.random.default_rng(2)
        for _ in range(100):
            v = rng.normal(size=5)
            u = v / np.linalg.norm(v)
            assert np.allclose(from_nsphere(to_nsphere(v)), u, atol=1e-12)

    def test_batch_matches_scalar(self):
        # arctan2's SIMD path is length-dependent at the ULP level, so
        # batch vs one-row agreement is near-exact, not bitwise
        rng = np.random.default_rng(3)
        V = rng.normal(size=(40, 7))
        B = to_nsphere_batch(V)
        for i in range(40):
            assert np.allclose(B[i], to_nsphere(V[i]), atol=1e-12, rtol=0)

    def test_single_row_batch_is_scalar(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            v = rng.normal(size=6)
            assert np.array_equal(to_nsphere_batch(v[None])[0], to_nsphere(v))

    def test_dim_too_small(self):
        with pytest.raises(ValueError):
            to_nsphere(np.array([1.0]))


class TestAngleDiff:
    def test_identity(self):
        a = np.array([0.3, 1.0, 5.0])
        assert np.allclose(angle_diff(a, a), 0.0)

    def test_azimuth_wrap(self):
        two_pi = 2 * math.pi
        d = angle_diff(np.array([0.1]), np.array([two_pi - 0.1]))
        assert abs(abs(d[0]) - 0.2) < 1e-12

    def test_polar_axis_no_wrap(self):
        d = angle_diff(np.array([0.3, 0.0]), np.array([0.5, 0.0]))
        assert abs(d[0] + 0.2) < 1e-12

    def test_wrap_bound(self):
        rng = np.random.default_rng(4)
        for _ in range(300):
            x = rng.uniform(-20, 20)
            assert abs(wrap_to_pi(x)) <= math.pi + 1e-12

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            angle_diff(np.zeros(2), np.zeros(3))


class TestMahalanobis:
    def test_at_mean(self):
        g = DiagonalGaussian(np.array([0.5, 1.0]), np.array([2.0, 3.0]))
        assert mahalanobis(g, np.array([0.5, 1.0])) == 0.0

    def test_single_axis(self):
        # sqrt(2^2 / 4) = 1
        g = DiagonalGaussian(np.array([2.0]), np.array([4.0]))
        assert abs(mahalanobis(g, np.array([0.0])) - 1.0) < 1e-12

    def test_unit_variance_euclidean(self):
        # diffs (0.3, 0.4), unit variances -> plain euclidean 0.5
        g = DiagonalGaussian(np.array([0.6, 0.8]), np.array([1.0, 1.0]))
        assert abs(mahalanobis(g, np.array([0.3, 0.4])) - 0.5) < 1e-12

    def test_azimuth_wraps(self):
        # last axis is periodic: diff 4 wraps to 4 - 2pi
        g = DiagonalGaussian(np.array([0.0, 4.0]), np.array([1.0, 1.0]))
        expected = math.hypot(0.0, 4.0 - 2 * math.pi)
        assert abs(mahalanobis(g, np.array([0.0, 0.0])) - expected) < 1e-12

    def test_does_not_mutate_gaussian(self):
        g = DiagonalGaussian(np.array([0.5, 6.0]), np.array([1.0, 1.0]))
        before = g.mean.copy()
        mahalanobis(g, np.array([0.1, 0.2]))
        assert np.array_equal(g.mean, before)


class TestKL:
    def test_self_zero(self):
        g = DiagonalGaussian(np.array([0.2, 1.1]), np.array([0.5, 2.0]))
        assert abs(kl_divergence(g, g)) < 1e-12

    def test_mean_shift_oracle(self):
        # 1-D, equal unit variances, mean diff 1 -> 0.5
        p = DiagonalGaussian(np.array([1.0]), np.array([1.0]))
        q = DiagonalGaussian(np.array([0.0]), np.array([1.0]))
        assert abs(kl_divergence(p, q) - 0.5) < 1e-12

    def test_variance_ratio_oracle(self):
        # 1-D, same means, var_p=1, var_q=2 -> 0.5*(0.5 - 1 + ln 2)
        p = DiagonalGaussian(np.array([0.0]), np.array([1.0]))
        q = DiagonalGaussian(np.array([0.0]), np.array([2.0]))
        expected = 0.5 * (0.5 - 1.0 + math.log(2.0))
        assert abs(kl_divergence(p, q) - expected) < 1e-12
        assert abs(expected - 0.0965735902799726) < 1e-12

    def test_nonnegative_random_pairs(self):
        rng = np.random.default_rng(5)
        for _ in range(1000):
            d = int(rng.integers(1, 6))
            p = DiagonalGaussian(rng.uniform(0, 2 * math.pi, d), rng.uniform(0.1, 3, d))
            q = DiagonalGaussian(rng.uniform(0, 2 * math.pi, d), rng.uniform(0.1, 3, d))
            assert kl_divergence(p, q) >= 0.0

    def test_dimension_mismatch(self):
        p = DiagonalGaussian(np.zeros(2), np.ones(2))
        q = DiagonalGaussian(np.zeros(3), np.ones(3))
        with pytest.raises(ValueError):
            kl_divergence(p, q)


class TestGaussianNoise:
    def test_zero_std(self):
        rng = np.random.default_rng(0)
        state = rng.bit_generator.state
        assert np.array_equal(gaussian_noise(0.0, 3, rng), np.zeros(3))
        # zero std must not consume randomness
        assert rng.bit_generator.state == state

    def test_determinism(self):
        a = gaussian_noise(1.0, 5, np.random.default_rng(9))
        b = gaussian_noise(1.0, 5, np.random.default_rng(9))
        assert np.array_equal(a, b)

    def test_sample_std(self):
        rng = np.random.default_rng(10)
        x = gaussian_noise(2.0, 100000, rng)
        assert abs(np.std(x) - 2.0) < 0.05

    def test_negative_std(self):
        with pytest.raises(ValueError):
            gaussian_noise(-0.1, 3, np.random.default_rng(0))


class TestDiagonalGaussian:
    def test_validation(self):
        with pytest.raises(ValueError):
            DiagonalGaussian(np.zeros(2), np.array([1.0, 0.0]))
        with pytest.raises(ValueError):
            DiagonalGaussian(np.zeros(2), np.array([1.0, -1.0]))
        with pytest.raises(ValueError):
            DiagonalGaussian(np.zeros(2), np.ones(3))

    def test_copy_independent(self):
        g = DiagonalGaussian(np.zeros(2), np.ones(2))
        h = g.copy()
        h.mean[0] = 5.0
        assert g.mean[0] == 0.0


@given(st.lists(st.floats(-10, 10).filter(lambda x: x == 0 or abs(x) >= 1e-6),
                min_size=2, max_size=9).filter(lambda v: any(x != 0 for x in v)),
       st.integers(-20, 20))
@settings(max_examples=200, deadline=None)
def test_scale_invariance_property(vec, exp):
    # bitwise invariance holds for power-of-two factors (exact float scaling)
    v = np.array(vec)
    assert np.array_equal(to_nsphere(v), to_nsphere(2.0**exp * v))
