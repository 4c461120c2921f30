"""Softmax cross-entropy classifier head applied to the final state."""

from __future__ import annotations

import numpy as np

from .errors import DimensionError
from .linalg import Array


def softmax(logits: Array) -> Array:
    z = logits - np.max(logits, axis=-1, keepdims=True)
    e = np.exp(z)
    return e / np.sum(e, axis=-1, keepdims=True)


def cross_entropy_head(h_T: Array, head_w: Array, head_b: Array, target,
                       reduction: str = "mean"
                       ) -> tuple[float, Array, Array, Array]:
    """Softmax cross-entropy on logits head_w @ h_T + head_b.

    h_T is (n,) with an integer target, or (B, n) with targets (B,).
    Returns (loss, dL/dh_T, dL/dhead_w, dL/dhead_b), all exact. With
    reduction="mean" the batch loss and gradients are averaged; with
    "sum" they are summed, which leaves each sequence's gradient unscaled.
    """
    if reduction not in ("mean", "sum"):
        raise ValueError(f"unknown reduction {reduction!r}")
    single = h_T.ndim == 1
    h = h_T[None, :] if single else h_T
    t = np.atleast_1d(np.asarray(target, dtype=np.int64))
    classes = head_w.shape[0]
    if head_w.shape[1] != h.shape[1] or head_b.shape != (classes,):
        raise DimensionError(
            f"head shapes {head_w.shape}/{head_b.shape} do not fit state "
            f"width {h.shape[1]}")
    if np.any(t < 0) or np.any(t >= classes):
        raise DimensionError(f"target out of range for {classes} classes")

    B = h.shape[0]
    p = softmax(h @ head_w.T + head_b)
    losses = -np.log(p[np.arange(B), t])
    g = p
    g[np.arange(B), t] -= 1.0          # softmax gradient: p - onehot
    if reduction == "mean":
        loss = float(losses.mean())
        g = g / B
    else:
        loss = float(losses.sum())
    dh = g @ head_w
    dw = g.T @ h
    db = g.sum(axis=0)
    if single:
        dh = dh[0]
    return loss, dh, dw, db
