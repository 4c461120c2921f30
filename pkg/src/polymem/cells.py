"""Recurrent cell families: one-step transitions, backward rules, Jacobians.

Four step rules over a hidden state h of width n driven by inputs x of
width d:

  leaky        h' = h + a*(tanh(U h + W x + b) - h)
  poly leaky   h' = h + a*(tanh(U h + W x + b) - |h|^r h)
  gated        h' = f*h + i*g,   f = sig(Uf h + Wf x + bf),
                                 i = sig(Ui h + Wi x + bi),
                                 g = tanh(U h + W x + b)
  poly gated   h' = h - (1-f)*|h|^r h + i*g
  gru          h' = (1-z)*h + z*g,  g = tanh(U (r*h) + W x + b)

with `*` elementwise. The rate exponent r selects the plain cell at r = 0
(|h|^0 h = h) and slows forgetting as r grows. Every cell exposes an exact
backward rule through one step and an analytic one-step Jacobian dh'/dh;
both are validated against central finite differences in the test suite.

All step functions accept a single state (n,) or a batch (B, n) and return
a cache holding the activations the backward pass needs, so forward values
are never recomputed with different rounding.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from .errors import DimensionError
from .linalg import Array, affine, sigmoid_vec, tanh_vec


def scalar_param(value: float) -> Array:
    """A trainable scalar stored as a 0-d float64 array (updatable in place)."""
    return np.asarray(float(value), dtype=np.float64)


def signed_power(h: Array, r: float) -> Array:
    """|h|^r * h elementwise.

    Maps 0 to 0 for every r >= 0 (the one-sided limit), and reduces to the
    identity at r = 0. For r = 2 this equals h^3.
    """
    if r == 0.0:
        return h
    return np.abs(h) ** r * h


def signed_power_deriv(h: Array, r: float) -> Array:
    """d/dh of |h|^r * h: (r+1)*|h|^r for h != 0, 0 at h = 0 (r > 0)."""
    return (r + 1.0) * np.abs(h) ** r


# ---------------------------------------------------------------------------
# Parameter bundles
# ---------------------------------------------------------------------------

@dataclass
class LeakyParams:
    """Leaky cell parameters; rate_r = 0 is the plain leaky cell."""
    alpha: Array          # () leak rate
    U: Array              # (n, n) recurrent weights
    W: Array              # (n, d) input weights
    b: Array              # (n,)
    rate_r: float = 0.0

    def __post_init__(self):
        if self.rate_r < 0:
            raise DimensionError(f"rate_r must be >= 0, got {self.rate_r}")

    @property
    def n(self) -> int:
        return self.U.shape[0]

    @property
    def d(self) -> int:
        return self.W.shape[1]


@dataclass
class GatedParams:
    """Forget/input-gated cell parameters; rate_r = 0 is the plain gated cell."""
    U_f: Array
    W_f: Array
    b_f: Array
    U_i: Array
    W_i: Array
    b_i: Array
    U: Array
    W: Array
    b: Array
    rate_r: float = 0.0

    def __post_init__(self):
        if self.rate_r < 0:
            raise DimensionError(f"rate_r must be >= 0, got {self.rate_r}")

    @property
    def n(self) -> int:
        return self.U.shape[0]

    @property
    def d(self) -> int:
        return self.W.shape[1]


@dataclass
class GruParams:
    U_z: Array
    W_z: Array
    b_z: Array
    U_r: Array
    W_r: Array
    b_r: Array
    U: Array
    W: Array
    b: Array

    @property
    def rate_r(self) -> float:
        return 0.0

    @property
    def n(self) -> int:
        return self.U.shape[0]

    @property
    def d(self) -> int:
        return self.W.shape[1]


CellParams = LeakyParams | GatedParams | GruParams

_KIND_BY_TYPE = {LeakyParams: "leaky", GatedParams: "gated", GruParams: "gru"}


def cell_kind(params: CellParams) -> str:
    return _KIND_BY_TYPE[type(params)]


def param_arrays(params: CellParams) -> dict[str, Array]:
    """Named trainable arrays of a bundle (rate_r is a hyperparameter)."""
    out = {}
    for f in fields(params):
        v = getattr(params, f.name)
        if isinstance(v, np.ndarray):
            out[f.name] = v
    return out


def copy_params(params: CellParams) -> CellParams:
    kw = {k: v.copy() for k, v in param_arrays(params).items()}
    if not isinstance(params, GruParams):
        kw["rate_r"] = params.rate_r
    return type(params)(**kw)


# ---------------------------------------------------------------------------
# Step caches
# ---------------------------------------------------------------------------

@dataclass
class LeakyCache:
    h_prev: Array
    x: Array
    h_cand: Array         # tanh(U h_prev + W x + b)


@dataclass
class GatedCache:
    h_prev: Array
    x: Array
    f: Array
    i: Array
    h_cand: Array


@dataclass
class GruCache:
    h_prev: Array
    x: Array
    z: Array
    r_gate: Array
    gated_h: Array        # r_gate * h_prev, the candidate's recurrent input
    h_cand: Array


StepCache = LeakyCache | GatedCache | GruCache

_CACHE_BY_TYPE = {LeakyParams: LeakyCache, GatedParams: GatedCache,
                  GruParams: GruCache}


# ---------------------------------------------------------------------------
# Forward steps
# ---------------------------------------------------------------------------

def leaky_step(p: LeakyParams, h_prev: Array, x: Array) -> tuple[Array, LeakyCache]:
    """h' = (1-a) h + a tanh(U h + W x + b), computed as h + a*(cand - h).

    The additive form is the unit-step explicit Euler update of the cell's
    continuous counterpart, so the two match bit for bit.
    """
    h_cand = tanh_vec(affine(p.U, h_prev, p.W, x, p.b))
    h = h_prev + p.alpha * (h_cand - h_prev)
    return h, LeakyCache(h_prev, x, h_cand)


def poly_leaky_step(p: LeakyParams, h_prev: Array, x: Array) -> tuple[Array, LeakyCache]:
    """h' = h + a*(tanh(U h + W x + b) - |h|^r h)."""
    h_cand = tanh_vec(affine(p.U, h_prev, p.W, x, p.b))
    h = h_prev + p.alpha * (h_cand - signed_power(h_prev, p.rate_r))
    return h, LeakyCache(h_prev, x, h_cand)


def gated_step(p: GatedParams, h_prev: Array, x: Array) -> tuple[Array, GatedCache]:
    """h' = f*h + i*g with sigmoid gates f, i and tanh candidate g."""
    f = sigmoid_vec(affine(p.U_f, h_prev, p.W_f, x, p.b_f))
    i = sigmoid_vec(affine(p.U_i, h_prev, p.W_i, x, p.b_i))
    h_cand = tanh_vec(affine(p.U, h_prev, p.W, x, p.b))
    h = f * h_prev + i * h_cand
    return h, GatedCache(h_prev, x, f, i, h_cand)


def poly_gated_step(p: GatedParams, h_prev: Array, x: Array) -> tuple[Array, GatedCache]:
    """h' = h - (1-f)*|h|^r h + i*g; recovers gated_step as r -> 0."""
    f = sigmoid_vec(affine(p.U_f, h_prev, p.W_f, x, p.b_f))
    i = sigmoid_vec(affine(p.U_i, h_prev, p.W_i, x, p.b_i))
    h_cand = tanh_vec(affine(p.U, h_prev, p.W, x, p.b))
    h = h_prev - (1.0 - f) * signed_power(h_prev, p.rate_r) + i * h_cand
    return h, GatedCache(h_prev, x, f, i, h_cand)


def gru_step(p: GruParams, h_prev: Array, x: Array) -> tuple[Array, GruCache]:
    """h' = (1-z)*h + z*g, g = tanh(U (r*h) + W x + b)."""
    z = sigmoid_vec(affine(p.U_z, h_prev, p.W_z, x, p.b_z))
    r_gate = sigmoid_vec(affine(p.U_r, h_prev, p.W_r, x, p.b_r))
    gated_h = r_gate * h_prev
    h_cand = tanh_vec(affine(p.U, gated_h, p.W, x, p.b))
    h = (1.0 - z) * h_prev + z * h_cand
    return h, GruCache(h_prev, x, z, r_gate, gated_h, h_cand)


def step(params: CellParams, h_prev: Array, x: Array) -> tuple[Array, StepCache]:
    """One state transition, dispatched on the parameter bundle."""
    if isinstance(params, LeakyParams):
        if params.rate_r == 0.0:
            return leaky_step(params, h_prev, x)
        return poly_leaky_step(params, h_prev, x)
    if isinstance(params, GatedParams):
        if params.rate_r == 0.0:
            return gated_step(params, h_prev, x)
        return poly_gated_step(params, h_prev, x)
    if isinstance(params, GruParams):
        return gru_step(params, h_prev, x)
    raise TypeError(f"unknown cell parameters: {type(params)!r}")


def replay_step(params: CellParams, cache: StepCache) -> Array:
    """Recompute the forward output of a cached step, bit exactly."""
    if type(cache) is not _CACHE_BY_TYPE[type(params)]:
        raise DimensionError(
            f"cache {type(cache).__name__} does not match {type(params).__name__}")
    h, _ = step(params, cache.h_prev, cache.x)
    return h


# ---------------------------------------------------------------------------
# Backward through one step
# ---------------------------------------------------------------------------

def _accum(dA: Array, v: Array) -> Array:
    # outer product summed over the batch axis, if any
    if dA.ndim == 1:
        return np.outer(dA, v)
    return dA.T @ v


def _accum_bias(dA: Array) -> Array:
    return dA if dA.ndim == 1 else dA.sum(axis=0)


def _dot_scalar(a: Array, b: Array) -> Array:
    return scalar_param(np.sum(a * b))


def _leaky_backward(p: LeakyParams, c: LeakyCache, dh: Array):
    r = p.rate_r
    d_cand = p.alpha * dh * (1.0 - c.h_cand * c.h_cand)
    grads = {
        "alpha": _dot_scalar(dh, c.h_cand - signed_power(c.h_prev, r)),
        "U": _accum(d_cand, c.h_prev),
        "W": _accum(d_cand, c.x),
        "b": _accum_bias(d_cand),
    }
    if r == 0.0:
        direct = (1.0 - p.alpha) * dh
    else:
        direct = dh * (1.0 - p.alpha * signed_power_deriv(c.h_prev, r))
    dh_prev = direct + d_cand @ p.U
    dx = d_cand @ p.W
    return grads, dh_prev, dx


def _gated_backward(p: GatedParams, c: GatedCache, dh: Array):
    r = p.rate_r
    q = signed_power(c.h_prev, r)          # equals h_prev at r = 0
    d_cand = dh * c.i * (1.0 - c.h_cand * c.h_cand)
    d_f = dh * q * c.f * (1.0 - c.f)
    d_i = dh * c.h_cand * c.i * (1.0 - c.i)
    grads = {
        "U_f": _accum(d_f, c.h_prev), "W_f": _accum(d_f, c.x), "b_f": _accum_bias(d_f),
        "U_i": _accum(d_i, c.h_prev), "W_i": _accum(d_i, c.x), "b_i": _accum_bias(d_i),
        "U": _accum(d_cand, c.h_prev), "W": _accum(d_cand, c.x), "b": _accum_bias(d_cand),
    }
    if r == 0.0:
        direct = dh * c.f
    else:
        direct = dh * (1.0 - (1.0 - c.f) * signed_power_deriv(c.h_prev, r))
    dh_prev = direct + d_f @ p.U_f + d_i @ p.U_i + d_cand @ p.U
    dx = d_f @ p.W_f + d_i @ p.W_i + d_cand @ p.W
    return grads, dh_prev, dx


def _gru_backward(p: GruParams, c: GruCache, dh: Array):
    d_cand = dh * c.z * (1.0 - c.h_cand * c.h_cand)
    d_z = dh * (c.h_cand - c.h_prev) * c.z * (1.0 - c.z)
    d_gated_h = d_cand @ p.U
    d_r = d_gated_h * c.h_prev * c.r_gate * (1.0 - c.r_gate)
    grads = {
        "U_z": _accum(d_z, c.h_prev), "W_z": _accum(d_z, c.x), "b_z": _accum_bias(d_z),
        "U_r": _accum(d_r, c.h_prev), "W_r": _accum(d_r, c.x), "b_r": _accum_bias(d_r),
        "U": _accum(d_cand, c.gated_h), "W": _accum(d_cand, c.x), "b": _accum_bias(d_cand),
    }
    dh_prev = (dh * (1.0 - c.z) + d_gated_h * c.r_gate
               + d_z @ p.U_z + d_r @ p.U_r)
    dx = d_z @ p.W_z + d_r @ p.W_r + d_cand @ p.W
    return grads, dh_prev, dx


def step_backward(params: CellParams, cache: StepCache, dh: Array
                  ) -> tuple[dict[str, Array], Array, Array]:
    """Exact reverse-mode rule through one cached step.

    Given dL/dh' returns (parameter gradients summed over the batch,
    dL/dh_prev, dL/dx).
    """
    if isinstance(params, LeakyParams):
        return _leaky_backward(params, cache, dh)
    if isinstance(params, GatedParams):
        return _gated_backward(params, cache, dh)
    if isinstance(params, GruParams):
        return _gru_backward(params, cache, dh)
    raise TypeError(f"unknown cell parameters: {type(params)!r}")


# ---------------------------------------------------------------------------
# Analytic one-step Jacobians dh'/dh
# ---------------------------------------------------------------------------

def jacobian_step(params: CellParams, h_prev: Array, x: Array) -> Array:
    """The (n, n) Jacobian of one step with respect to the previous state.

    Single-sample only: h_prev must be (n,) and x (d,).
    """
    if h_prev.ndim != 1 or x.ndim != 1:
        raise DimensionError(
            f"jacobian_step takes single vectors, got {h_prev.shape}/{x.shape}")
    n = h_prev.shape[0]
    h, cache = step(params, h_prev, x)

    if isinstance(params, LeakyParams):
        D = 1.0 - cache.h_cand * cache.h_cand
        if params.rate_r == 0.0:
            lead = (1.0 - float(params.alpha)) * np.eye(n)
        else:
            lead = np.diag(1.0 - float(params.alpha)
                           * signed_power_deriv(h_prev, params.rate_r))
        return lead + float(params.alpha) * (D[:, None] * params.U)

    if isinstance(params, GatedParams):
        f, i, g = cache.f, cache.i, cache.h_cand
        D = 1.0 - g * g
        if params.rate_r == 0.0:
            lead = np.diag(f)
            q = h_prev
        else:
            lead = np.diag(1.0 - (1.0 - f)
                           * signed_power_deriv(h_prev, params.rate_r))
            q = signed_power(h_prev, params.rate_r)
        return (lead
                + (q * f * (1.0 - f))[:, None] * params.U_f
                + (g * i * (1.0 - i))[:, None] * params.U_i
                + (i * D)[:, None] * params.U)

    if isinstance(params, GruParams):
        z, rg, g = cache.z, cache.r_gate, cache.h_cand
        D = 1.0 - g * g
        # d(candidate pre-activation)/dh = U (diag(rg) + diag(h) diag(rg') U_r)
        inner = params.U @ (np.diag(rg)
                            + (h_prev * rg * (1.0 - rg))[:, None] * params.U_r)
        return (np.diag(1.0 - z)
                + (z * D)[:, None] * inner
                + ((g - h_prev) * z * (1.0 - z))[:, None] * params.U_z)

    raise TypeError(f"unknown cell parameters: {type(params)!r}")
