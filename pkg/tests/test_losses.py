import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from omnisr import losses
from omnisr.losses import LossWeights


def central_differences(ref, dist, h=1e-5):
    fd = np.empty_like(dist)
    for idx in np.ndindex(dist.shape):
        up, down = dist.copy(), dist.copy()
        up[idx] += h
        down[idx] -= h
        fd[idx] = ((1 - losses.d_360ss(ref, up)) - (1 - losses.d_360ss(ref, down))) / (2 * h)
    return fd


def max_rel_error(g, fd, floor=1e-8):
    return float(np.max(np.abs(g - fd) / np.maximum(np.maximum(np.abs(g), np.abs(fd)), floor)))


class TestLoss360:
    def test_identical_pairs(self, rng):
        pairs = [(a, a.copy()) for a in (rng.random((8, 16)), rng.random((4, 8)))]
        assert losses.loss_360ss(pairs) == pytest.approx(0.0, abs=1e-12)

    def test_complement_of_single_d(self, rng):
        a, b = rng.random((8, 16)), rng.random((8, 16))
        assert losses.loss_360ss([(a, b)]) == pytest.approx(1 - losses.d_360ss(a, b), abs=1e-15)

    def test_mean_then_complement(self, monkeypatch):
        ds = iter([0.6, 1.0])
        monkeypatch.setattr(losses, "d_360ss", lambda *a, **k: next(ds))
        assert losses.loss_360ss([(None, None), (None, None)]) == pytest.approx(0.2, abs=1e-15)

    def test_single_d_point_eight(self, monkeypatch):
        monkeypatch.setattr(losses, "d_360ss", lambda *a, **k: 0.8)
        assert losses.loss_360ss([(None, None)]) == pytest.approx(0.2, abs=1e-15)

    def test_empty_batch(self):
        with pytest.raises(ValueError):
            losses.loss_360ss([])

    def test_range(self, rng):
        a = rng.random((8, 16))
        pairs = [(a, 1 - a), (a, rng.random((8, 16)))]
        assert 0.0 <= losses.loss_360ss(pairs) <= 2.0


class TestGrad360:
    def test_zero_at_equality(self, rng):
        a = rng.random((8, 16))
        np.testing.assert_allclose(losses.grad_360ss(a, a.copy()), 0.0, atol=1e-14)

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_matches_finite_differences(self, seed):
        r = np.random.default_rng(seed)
        ref, dist = r.random((16, 32)), r.random((16, 32))
        g = losses.grad_360ss(ref, dist)
        assert max_rel_error(g, central_differences(ref, dist)) < 1e-3

    def test_near_reference_finite_differences(self, rng):
        ref = rng.random((8, 12))
        dist = np.clip(ref + 0.02 * rng.standard_normal(ref.shape), 0, 1)
        g = losses.grad_360ss(ref, dist)
        assert max_rel_error(g, central_differences(ref, dist)) < 1e-3

    def test_shift_equivariance(self, rng):
        ref, dist = rng.random((16, 32)), rng.random((16, 32))
        g = losses.grad_360ss(ref, dist)
        gs = losses.grad_360ss(np.roll(ref, 9, axis=1), np.roll(dist, 9, axis=1))
        np.testing.assert_allclose(gs, np.roll(g, 9, axis=1), rtol=0, atol=1e-15)

    def test_descent_step_reduces_loss(self, rng):
        ref, dist = rng.random((16, 32)), rng.random((16, 32))
        g = losses.grad_360ss(ref, dist)
        before = 1 - losses.d_360ss(ref, dist)
        after = 1 - losses.d_360ss(ref, dist - 1.0 * g)
        assert after < before

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            losses.grad_360ss(np.zeros((4, 4)), np.zeros((4, 5)))


class TestFeatureLoss:
    def test_identical(self, rng):
        f = rng.standard_normal((2, 3, 4))
        assert losses.feature_loss(f, f) == 0.0

    def test_offset_by_one(self, rng):
        f = rng.standard_normal((5, 6))
        assert losses.feature_loss(f, f + 1) == pytest.approx(1.0, abs=1e-12)

    def test_matches_elementwise_oracle(self, rng):
        a, b = rng.standard_normal((3, 7, 5)), rng.standard_normal((3, 7, 5))
        expected = sum((x - y) ** 2 for x, y in zip(a.ravel(), b.ravel())) / a.size
        assert losses.feature_loss(a, b) == pytest.approx(expected, abs=1e-12)
        expected_l1 = sum(abs(x - y) for x, y in zip(a.ravel(), b.ravel())) / a.size
        assert losses.feature_loss(a, b, norm="l1") == pytest.approx(expected_l1, abs=1e-12)

    def test_batched_average(self, rng):
        a = [rng.standard_normal((4, 4)), rng.standard_normal((2, 8, 3))]
        b = [a[0] + 1.0, a[1] + 2.0]
        assert losses.feature_loss(a, b) == pytest.approx((1.0 + 4.0) / 2, abs=1e-12)

    def test_symmetry(self, rng):
        a, b = rng.standard_normal((6, 6)), rng.standard_normal((6, 6))
        assert losses.feature_loss(a, b) == losses.feature_loss(b, a)

    def test_errors(self):
        with pytest.raises(ValueError):
            losses.feature_loss(np.zeros((2, 2)), np.zeros((2, 3)))
        with pytest.raises(ValueError):
            losses.feature_loss(np.zeros(2), np.zeros(2), norm="l3")
        with pytest.raises(ValueError):
            losses.feature_loss([], [])


class TestAdversarialLoss:
    def test_examples(self):
        assert losses.adversarial_loss([1.0, 1.0, 1.0]) == 0.0
        assert losses.adversarial_loss([math.exp(-1)]) == pytest.approx(1.0, abs=1e-12)
        assert losses.adversarial_loss([1.0, math.exp(-2)]) == pytest.approx(2.0, abs=1e-12)

    def test_is_sum_not_mean(self):
        assert losses.adversarial_loss([0.5] * 4) == pytest.approx(4 * math.log(2), abs=1e-12)

    @pytest.mark.parametrize("bad", [[0.0], [-0.1], [1.5], [], [float("nan")]])
    def test_rejects_invalid(self, bad):
        with pytest.raises(ValueError):
            losses.adversarial_loss(bad)

    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.floats(1e-6, 1.0), min_size=1, max_size=6), st.floats(0.01, 0.99))
    def test_nonnegative_and_decreasing(self, probs, frac):
        base = losses.adversarial_loss(probs)
        assert base >= 0
        if probs[0] < 1.0:
            bumped = [probs[0] + frac * (1.0 - probs[0])] + probs[1:]
            if bumped[0] > probs[0]:
                assert losses.adversarial_loss(bumped) < base


class TestObjective:
    @pytest.mark.parametrize("terms, expected", [
        ((1.0, 0.0, 0.0), 1.0), ((0.0, 1.0, 1.0), 20.0), ((0.1, 0.2, 0.3), 5.1)])
    def test_hand_arithmetic(self, terms, expected):
        assert losses.total_objective(*terms, LossWeights(10, 10)) == pytest.approx(expected, abs=1e-12)

    def test_default_weights_are_ten(self):
        assert LossWeights() == LossWeights(beta=10.0, gamma=10.0)

    @settings(max_examples=50, deadline=None)
    @given(st.floats(-1e3, 1e3), st.floats(-1e3, 1e3), st.floats(-1e3, 1e3), st.floats(-10, 10))
    def test_linear(self, x, y, z, a):
        w = LossWeights(3.5, 0.25)
        assert losses.total_objective(a * x, a * y, a * z, w) == pytest.approx(
            a * losses.total_objective(x, y, z, w), rel=1e-12, abs=1e-9)

    @pytest.mark.parametrize("bad", [dict(beta=-1.0), dict(gamma=float("inf"))])
    def test_weight_validation(self, bad):
        with pytest.raises(ValueError):
            LossWeights(**bad)


class TestPatchScores:
    def test_examples(self):
        assert losses.patch_score_average(np.full((4, 4), 0.5)) == 0.5
        assert losses.patch_score_average([[0.0, 1.0]]) == 0.5
        grid = np.arange(1, 10).reshape(3, 3) / 10
        assert losses.patch_score_average(grid) == pytest.approx(0.5, abs=1e-15)

    @pytest.mark.parametrize("bad", [np.zeros((0, 3)), [[1.2]], [[-0.1, 0.5]]])
    def test_rejects_invalid(self, bad):
        with pytest.raises(ValueError):
            losses.patch_score_average(bad)
