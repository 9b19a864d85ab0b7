"""Dense float64 numeric primitives: matrix product, stable softmax,
cross-entropy, gate nonlinearities, and finite-difference gradient checking.

Arrays are plain C-contiguous numpy float64 throughout; every operation is
pure and deterministic.
"""

from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np

from .errors import IndexOutOfRange, NonFiniteLoss, ShapeMismatch

LOG_EPS = 1e-12  # added inside the loss log to bound it; a deliberate bias


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2:
        raise ShapeMismatch(f"matmul needs 2-D operands, got {a.shape} and {b.shape}")
    if a.shape[1] != b.shape[0]:
        raise ShapeMismatch(f"inner dimensions differ: {a.shape} x {b.shape}")
    return a @ b


def softmax(v: np.ndarray) -> np.ndarray:
    """Stable softmax of a vector (max subtracted before exponentiation).

    Components are clamped to the open interval (0, 1): extreme input ranges
    otherwise round the tails to exactly 0 or 1 in float64.
    """
    v = np.asarray(v, dtype=np.float64)
    shifted = v - np.max(v)
    e = np.exp(shifted)
    out = e / np.sum(e)
    return np.clip(out, np.finfo(np.float64).tiny, np.nextafter(1.0, 0.0))


def log_softmax(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    shifted = v - np.max(v)
    return shifted - math.log(np.sum(np.exp(shifted)))


def cross_entropy(probs: np.ndarray, target_id: int) -> float:
    probs = np.asarray(probs, dtype=np.float64)
    if not 0 <= target_id < probs.shape[0]:
        raise IndexOutOfRange(f"target {target_id} outside vector of length {probs.shape[0]}")
    # the epsilon bound must not push a saturated probability above 1
    return -math.log(min(probs[target_id] + LOG_EPS, 1.0))


def sigmoid(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m, dtype=np.float64)
    out = np.empty_like(m)
    pos = m >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-m[pos]))
    e = np.exp(m[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def tanh(m: np.ndarray) -> np.ndarray:
    return np.tanh(np.asarray(m, dtype=np.float64))


_ELEMENTWISE = {"sigmoid": sigmoid, "tanh": tanh}


def elementwise(f: str, m: np.ndarray) -> np.ndarray:
    """Apply a named nonlinearity ('sigmoid' or 'tanh') preserving shape."""
    try:
        fn = _ELEMENTWISE[f]
    except KeyError:
        raise ValueError(f"unknown elementwise function {f!r}") from None
    return fn(m)


def _sample_indices(size: int, max_checks: int) -> np.ndarray:
    """Deterministic strided sample of flat indices (all when size is small)."""
    if size <= max_checks:
        return np.arange(size)
    stride = size / max_checks
    return np.unique((np.arange(max_checks) * stride).astype(np.int64))


def grad_check(
    loss_fn: Callable[[Sequence[np.ndarray]], float],
    params: Sequence[np.ndarray],
    analytic: Sequence[np.ndarray],
    h: float = 1e-5,
    max_checks_per_param: int = 200,
) -> float:
    """Compare analytic gradients against central finite differences.

    Perturbs each sampled scalar of each parameter in place ((L(t+h)-L(t-h))/2h),
    restoring it afterwards, and returns the maximum relative error
    |g_a - g_n| / max(|g_a|, |g_n|, 1e-8) over all checked scalars.  loss_fn
    receives the (perturbed) parameter list and must be deterministic.
    """
    if h <= 0:
        raise ValueError("h must be positive")
    if len(params) != len(analytic):
        raise ShapeMismatch("params and analytic gradients differ in count")
    worst = 0.0
    for theta, grad in zip(params, analytic):
        if theta.shape != grad.shape:
            raise ShapeMismatch(f"gradient shape {grad.shape} != parameter shape {theta.shape}")
        if not theta.flags["C_CONTIGUOUS"]:
            raise ValueError("grad_check perturbs parameters in place; pass contiguous arrays")
        flat = theta.reshape(-1)
        gflat = grad.reshape(-1)
        for idx in _sample_indices(flat.size, max_checks_per_param):
            original = flat[idx]
            flat[idx] = original + h
            loss_plus = loss_fn(params)
            flat[idx] = original - h
            loss_minus = loss_fn(params)
            flat[idx] = original
            if not (math.isfinite(loss_plus) and math.isfinite(loss_minus)):
                raise NonFiniteLoss("loss became non-finite during gradient check")
            numeric = (loss_plus - loss_minus) / (2.0 * h)
            g = gflat[idx]
            err = abs(g - numeric) / max(abs(g), abs(numeric), 1e-8)
            worst = max(worst, err)
    return worst
