"""Full-length backpropagation through time over cached trajectories.

forward_sequence unrolls a cell over a sequence and records everything the
exact backward pass needs; backward_sequence replays the caches in reverse
and produces gradients for every parameter, every input, and every
intermediate state. No truncation: the per-timestep input gradients are
the point, and they need the whole sequence.

Sequences may be single ((T, d) inputs, (n,) state) or batched
((T, B, d) inputs, (B, n) state). Within a batch, parameter gradients are
summed over sequences in vectorized order, so results are deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cells import CellParams, StepCache, cell_kind, replay_step, step, step_backward
from .diagnostics import GradProfile, ProfileMeta
from .errors import DimensionError, DivergenceError, IntegrityError
from .linalg import Array
from .losses import cross_entropy_head


@dataclass
class Trajectory:
    """Forward-pass record: states h_0..h_T, inputs x_1..x_T, step caches."""
    states: Array                  # (T+1, n) or (T+1, B, n)
    inputs: Array                  # (T, d) or (T, B, d)
    caches: list[StepCache]

    @property
    def T(self) -> int:
        return self.inputs.shape[0]

    @property
    def final_state(self) -> Array:
        return self.states[-1]


@dataclass
class Gradients:
    """Reverse-mode results: dL/d(parameter), dL/dx_t, dL/dh_t."""
    params: dict[str, Array]
    input_grads: Array             # same shape as Trajectory.inputs
    state_grads: Array             # same shape as Trajectory.states


def forward_sequence(params: CellParams, h0: Array, xs) -> Trajectory:
    """Unroll the cell from h0 over inputs xs.

    xs may be a (T, d) or (T, B, d) array, or a sequence of per-step
    vectors. Raises DivergenceError with the first offending timestep if
    the state leaves the finite range.
    """
    h0 = np.asarray(h0, dtype=np.float64)
    if len(xs) == 0:
        inputs = np.zeros((0,) + h0.shape[:-1] + (params.d,))
        return Trajectory(h0[None].copy(), inputs, [])
    xs = np.asarray(xs, dtype=np.float64)
    if xs.ndim != h0.ndim + 1:
        raise DimensionError(
            f"inputs of shape {xs.shape} do not match state of shape {h0.shape}")

    states = np.empty((xs.shape[0] + 1,) + h0.shape)
    states[0] = h0
    caches: list[StepCache] = []
    h = h0
    for t in range(xs.shape[0]):
        h, cache = step(params, h, xs[t])
        if not np.all(np.isfinite(h)):
            raise DivergenceError(
                f"non-finite state at timestep {t + 1}", step=t + 1)
        states[t + 1] = h
        caches.append(cache)
    return Trajectory(states, xs, caches)


def _check_integrity(params: CellParams, traj: Trajectory) -> None:
    if len(traj.caches) != traj.T:
        raise IntegrityError(
            f"{len(traj.caches)} caches for {traj.T} inputs")
    if traj.T == 0:
        return
    try:
        replayed = replay_step(params, traj.caches[0])
    except DimensionError as e:
        raise IntegrityError(f"trajectory does not fit parameters: {e}") from e
    if not np.array_equal(replayed, traj.states[1]):
        raise IntegrityError(
            "trajectory was not produced by these parameters "
            "(replayed first step disagrees)")


def backward_sequence(params: CellParams, traj: Trajectory, dL_dhT: Array
                      ) -> Gradients:
    """Exact reverse sweep from a gradient at the final state.

    Parameter gradients are summed over the batch axis, if any. The
    trajectory must come from forward_sequence with the same parameters;
    a cheap bit-exact replay of the first step guards against mismatches.
    """
    _check_integrity(params, traj)
    dL_dhT = np.asarray(dL_dhT, dtype=np.float64)
    if dL_dhT.shape != traj.states.shape[1:]:
        raise DimensionError(
            f"dL_dhT shape {dL_dhT.shape} does not match states "
            f"{traj.states.shape[1:]}")

    state_grads = np.empty_like(traj.states)
    input_grads = np.empty_like(traj.inputs)
    param_grads: dict[str, Array] = {}

    dh = dL_dhT
    state_grads[-1] = dh
    for t in range(traj.T - 1, -1, -1):
        g, dh, dx = step_backward(params, traj.caches[t], dh)
        input_grads[t] = dx
        state_grads[t] = dh
        if param_grads:
            for k, v in g.items():
                param_grads[k] += v
        else:
            param_grads = g
    if not param_grads:
        from .cells import param_arrays
        param_grads = {k: np.zeros_like(v)
                       for k, v in param_arrays(params).items()}
    return Gradients(param_grads, input_grads, state_grads)


def input_gradient_norms(params: CellParams, traj: Trajectory,
                         head_w: Array, head_b: Array, target,
                         epoch: int | None = None,
                         seed: int | None = None) -> GradProfile:
    """Per-timestep Euclidean norms ||dL/dx_t|| for a final-step
    cross-entropy loss.

    For a batched trajectory the per-sequence norms are averaged across
    the batch (the summed loss keeps each sequence's gradient unscaled).
    Returns a GradProfile ready for decay fitting.
    """
    _, dhT, _, _ = cross_entropy_head(traj.final_state, head_w, head_b,
                                      target, reduction="sum")
    grads = backward_sequence(params, traj, dhT)
    g = grads.input_grads
    norms = np.linalg.norm(g, axis=-1)     # (T,) or (T, B)
    if norms.ndim == 2:
        norms = norms.mean(axis=1)
    meta = ProfileMeta(cell_kind=cell_kind(params), rate_r=params.rate_r,
                       epoch=epoch, seed=seed)
    return GradProfile(norms=norms, meta=meta)
