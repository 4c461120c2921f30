"""Continuous-time decay oracles and a forward-Euler integrator.

Two scalar decay laws, applied entrywise to vectors:

  exponential   dh/dt = -c h          h(t0+dt) = exp(-c dt) h(t0)
  polynomial    dh/dt = -|h|^r h      h(t0+dt) = (r dt + h(t0)^-r)^(-1/r)

The polynomial closed form holds for h > 0 (the law is odd-symmetric, so
the h < 0 branch mirrors it). Its state sensitivity follows from direct
differentiation:

  d h(t0+dt) / d h(t0) = (1 + r h(t0)^r dt)^-(r+1)/r

These closed forms are the ground truth for the discrete cells: the
(poly-)leaky step is exactly one unit-step Euler update of the cell's
vector field, and the integrator here reproduces it bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import log

import numpy as np

from .cells import LeakyParams, signed_power
from .errors import DivergenceError, DomainError
from .linalg import Array, affine, tanh_vec


@dataclass(frozen=True)
class DecayLaw:
    """Right-hand side of a scalar decay ODE, applied entrywise."""
    kind: str                      # "exponential" or "polynomial"
    rate: float                    # c for exponential, r for polynomial

    def __post_init__(self):
        if self.kind not in ("exponential", "polynomial"):
            raise DomainError(f"unknown decay law {self.kind!r}")
        if self.rate <= 0:
            raise DomainError(f"rate must be positive, got {self.rate}")

    def __call__(self, h: Array) -> Array:
        if self.kind == "exponential":
            return -self.rate * h
        return -signed_power(h, self.rate)


def exp_decay_solution(h0: float, c: float, dt: float) -> float:
    """exp(-c dt) * h0."""
    if c <= 0:
        raise DomainError(f"c must be positive, got {c}")
    if dt < 0:
        raise DomainError(f"dt must be nonnegative, got {dt}")
    return float(np.exp(-c * dt) * h0)


def poly_decay_solution(h0: float, r: float, dt: float) -> float:
    """(r dt + h0^-r)^(-1/r) for h0 > 0, r > 0."""
    if h0 <= 0:
        raise DomainError(f"h0 must be positive, got {h0}")
    if r <= 0:
        raise DomainError(f"r must be positive, got {r}")
    if dt < 0:
        raise DomainError(f"dt must be nonnegative, got {dt}")
    if dt == 0:
        return float(h0)
    return float((r * dt + h0 ** (-r)) ** (-1.0 / r))


def poly_decay_sensitivity(h0: float, r: float, dt: float) -> float:
    """d/dh0 of poly_decay_solution: (1 + r h0^r dt)^-(r+1)/r."""
    if h0 <= 0:
        raise DomainError(f"h0 must be positive, got {h0}")
    if r <= 0:
        raise DomainError(f"r must be positive, got {r}")
    if dt < 0:
        raise DomainError(f"dt must be nonnegative, got {dt}")
    if dt == 0:
        return 1.0
    return float((1.0 + r * h0 ** r * dt) ** (-(r + 1.0) / r))


def euler_integrate(rhs, h0, step: float, n_steps: int) -> Array:
    """Explicit forward Euler: h_{k+1} = h_k + step * rhs(h_k).

    rhs is a DecayLaw or any callable mapping a state array to its time
    derivative. Returns the whole trajectory, shape (n_steps+1,) + h0.shape.
    Raises DivergenceError with the offending step index if the state
    leaves the finite range.
    """
    if step <= 0:
        raise DomainError(f"step must be positive, got {step}")
    h = np.asarray(h0, dtype=np.float64)
    out = np.empty((n_steps + 1,) + h.shape)
    out[0] = h
    for k in range(n_steps):
        h = h + step * rhs(h)
        if not np.all(np.isfinite(h)):
            raise DivergenceError(f"Euler state non-finite at step {k + 1}",
                                  step=k + 1)
        out[k + 1] = h
    return out


def leaky_rhs(params: LeakyParams, x: Array):
    """Vector field of the (poly-)leaky cell at a frozen input x.

    Returns f with f(h) = alpha * (tanh(U h + W x + b) - |h|^r h); one
    Euler step of size 1 through f equals the discrete cell step exactly.
    """
    def f(h: Array) -> Array:
        cand = tanh_vec(affine(params.U, h, params.W, x, params.b))
        return params.alpha * (cand - signed_power(h, params.rate_r))
    return f


def characteristic_time(alpha: float) -> float:
    """Steps for a leaky unit's memory to shrink by e: -1/log(1 - alpha)."""
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    return -1.0 / log(1.0 - alpha)
