"""Dense float64 vector/matrix primitives and elementwise nonlinearities.

All state containers are plain numpy arrays. A "vector" argument may carry
a leading batch axis: every function here accepts ``(n,)`` or ``(B, n)``
and returns the same leading shape, so single-sequence code and batched
training share one code path. All functions are pure.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionError

Array = np.ndarray


def as_f64(x) -> Array:
    return np.asarray(x, dtype=np.float64)


def check_finite(v: Array, name: str) -> None:
    if not np.all(np.isfinite(v)):
        raise DimensionError(f"{name} contains non-finite entries")


def _check_vec(v: Array, dim: int, name: str) -> None:
    if v.ndim not in (1, 2) or v.shape[-1] != dim:
        raise DimensionError(
            f"{name} must have last dimension {dim}, got shape {v.shape}")


def affine(U: Array, h: Array, W: Array, x: Array, b: Array) -> Array:
    """U @ h + W @ x + b for a single state or a batch of states.

    U is (n, n_h), W is (n, d), b is (n,). h may be (n_h,) or (B, n_h)
    and x correspondingly (d,) or (B, d).
    """
    if U.ndim != 2 or W.ndim != 2 or b.ndim != 1:
        raise DimensionError(
            f"affine expects 2-d U/W and 1-d b, got {U.shape}/{W.shape}/{b.shape}")
    n = U.shape[0]
    if W.shape[0] != n or b.shape[0] != n:
        raise DimensionError(
            f"row counts disagree: U {U.shape}, W {W.shape}, b {b.shape}")
    _check_vec(h, U.shape[1], "h")
    _check_vec(x, W.shape[1], "x")
    if h.ndim != x.ndim:
        raise DimensionError(
            f"h and x must both be single vectors or both batched, "
            f"got shapes {h.shape} and {x.shape}")
    if h.ndim == 2 and h.shape[0] != x.shape[0]:
        raise DimensionError(
            f"batch sizes disagree: h {h.shape} vs x {x.shape}")
    # h @ U.T == U @ h for 1-d h, and the batched product for 2-d h.
    return h @ U.T + x @ W.T + b


def tanh_vec(v: Array) -> Array:
    return np.tanh(v)


def tanh_deriv(v: Array) -> Array:
    """tanh'(v) = 1 - tanh(v)^2."""
    y = np.tanh(v)
    return 1.0 - y * y


def sigmoid_vec(v: Array) -> Array:
    """sigmoid(v) = 1 / (1 + exp(-v)), computed without overflow."""
    v = np.asarray(v, dtype=np.float64)
    out = np.empty_like(v)
    pos = v >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-v[pos]))
    e = np.exp(v[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def sigmoid_deriv(v: Array) -> Array:
    """sigmoid'(v) = sigmoid(v) * (1 - sigmoid(v))."""
    s = sigmoid_vec(v)
    return s * (1.0 - s)
