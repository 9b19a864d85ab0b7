"""Numeric kernel contracts: matmul, softmax, cross-entropy, nonlinearities,
and the finite-difference gradient checker."""

import math

import numpy as np
import pytest

from urdu_abssum.errors import IndexOutOfRange, NonFiniteLoss, ShapeMismatch
from urdu_abssum.numerics import (
    cross_entropy,
    elementwise,
    grad_check,
    log_softmax,
    matmul,
    sigmoid,
    softmax,
    tanh,
)


class TestMatmul:
    def test_identity(self):
        a = np.arange(6, dtype=float).reshape(2, 3)
        assert np.array_equal(matmul(a, np.eye(3)), a)

    def test_hand_product(self):
        out = matmul(np.array([[1.0, 2.0], [3.0, 4.0]]), np.array([[1.0], [1.0]]))
        assert np.array_equal(out, np.array([[3.0], [7.0]]))

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatch):
            matmul(np.zeros((2, 3)), np.zeros((2, 2)))

    def test_associative_within_tolerance(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            a, b, c = (rng.uniform(-1, 1, size=(8, 8)) for _ in range(3))
            left = matmul(matmul(a, b), c)
            right = matmul(a, matmul(b, c))
            assert np.allclose(left, right, rtol=1e-9, atol=1e-12)


class TestSoftmax:
    def test_symmetric_pair(self):
        assert np.allclose(softmax(np.array([0.0, 0.0])), [0.5, 0.5], atol=1e-15)

    def test_shift_invariance(self):
        v = np.array([0.3, -1.2, 4.0, 0.0])
        assert np.allclose(softmax(v), softmax(v + 123.456), atol=1e-15)

    def test_closed_form(self):
        out = softmax(np.array([math.log(1.0), math.log(3.0)]))
        assert np.allclose(out, [0.25, 0.75], atol=1e-15)

    def test_extreme_magnitudes(self):
        for v in ([700.0, -700.0, 0.0], [700.0, 699.0], [-700.0, -700.0]):
            out = softmax(np.array(v))
            assert abs(out.sum() - 1.0) <= 1e-12
            assert np.all(out > 0.0) and np.all(out < 1.0)

    def test_log_softmax_consistent(self):
        v = np.array([0.1, -3.0, 2.5, 700.0])
        assert np.allclose(np.exp(log_softmax(v)), softmax(v), atol=1e-12)


class TestCrossEntropy:
    def test_confident_correct_is_near_zero(self):
        assert cross_entropy(np.array([0.0, 1.0]), 1) == pytest.approx(0.0, abs=1e-11)

    def test_uniform_is_log_v(self):
        v = 16
        probs = np.full(v, 1.0 / v)
        assert cross_entropy(probs, 3) == pytest.approx(math.log(v), abs=1e-9)

    def test_hand_value(self):
        assert cross_entropy(np.array([0.25, 0.75]), 1) == pytest.approx(-math.log(0.75), abs=1e-9)

    def test_index_out_of_range(self):
        with pytest.raises(IndexOutOfRange):
            cross_entropy(np.array([0.5, 0.5]), 2)

    def test_never_negative(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            p = softmax(rng.normal(size=7))
            assert cross_entropy(p, int(rng.integers(7))) >= 0.0


class TestElementwise:
    def test_sigmoid_at_zero(self):
        assert elementwise("sigmoid", np.zeros((2, 2)))[0, 0] == 0.5

    def test_tanh_at_zero(self):
        assert elementwise("tanh", np.zeros(3))[1] == 0.0

    def test_sigmoid_closed_form(self):
        assert sigmoid(np.array([math.log(3.0)]))[0] == pytest.approx(0.75, abs=1e-15)

    def test_stable_at_large_negative(self):
        out = sigmoid(np.array([-1000.0, 1000.0]))
        assert out[0] == 0.0 and out[1] == 1.0

    def test_shape_preserved(self):
        assert tanh(np.zeros((3, 4))).shape == (3, 4)

    def test_unknown_name(self):
        with pytest.raises(ValueError):
            elementwise("relu", np.zeros(2))


class TestGradCheck:
    def test_quadratic_matches_closed_form(self):
        theta = np.array([[3.0]])
        analytic = np.array([[6.0]])

        def loss(params):
            return float(params[0][0, 0] ** 2)

        assert grad_check(loss, [theta], [analytic], h=1e-5) < 1e-9

    def test_scaled_gradient_yields_half_error(self):
        theta = np.array([[3.0]])
        wrong = np.array([[12.0]])  # twice the true derivative

        def loss(params):
            return float(params[0][0, 0] ** 2)

        assert grad_check(loss, [theta], [wrong], h=1e-5) == pytest.approx(0.5, abs=1e-6)

    def test_zero_parameters(self):
        assert grad_check(lambda params: 0.0, [], [], h=1e-5) == 0.0

    def test_non_finite_loss_raises(self):
        theta = np.array([1.0])

        def loss(params):
            return float("nan")

        with pytest.raises(NonFiniteLoss):
            grad_check(loss, [theta], [np.zeros(1)], h=1e-5)

    def test_sampling_covers_small_tensors_fully(self):
        theta = np.arange(1.0, 7.0).reshape(2, 3)
        analytic = 2.0 * theta  # gradient of sum of squares

        def loss(params):
            return float(np.sum(params[0] ** 2))

        assert grad_check(loss, [theta], [analytic], h=1e-5) < 1e-8
