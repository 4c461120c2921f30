"""Decay-regime classification for per-timestep gradient-norm profiles.

A profile is the sequence ||dL/dx_t||, t = 1..T. Backward time s = T - t
counts steps from the loss. Two candidate models are fitted by ordinary
least squares over a window of timesteps:

  exponential   log(norm_t) ~ a + slope * (T - t)
  polynomial    log(norm_t) ~ a + slope * log(T - t + 1)

and the better-fitting model wins if its r-squared clears a threshold;
otherwise the profile is classified "neither". Fits use only strictly
positive norms; excluded zeros are counted, not imputed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import FormatError, InsufficientDataError
from .linalg import Array

EXPONENTIAL = "exponential"
POLYNOMIAL = "polynomial"
NEITHER = "neither"

R2_THRESHOLD = 0.9


@dataclass
class ProfileMeta:
    cell_kind: str
    rate_r: float
    epoch: int | None = None
    seed: int | None = None


@dataclass
class GradProfile:
    """Per-timestep gradient norms for one (model, batch, epoch) snapshot."""
    norms: Array                   # (T,), entries >= 0, index t = 1..T
    meta: ProfileMeta

    @property
    def T(self) -> int:
        return len(self.norms)


@dataclass
class DecayFit:
    model: str
    slope: float
    intercept: float
    r_squared: float
    fit_window: tuple[int, int]    # inclusive timestep range (1-based)
    n_excluded: int                # zero/negative norms dropped from the fit
    degenerate: bool = False       # constant response, r_squared forced to 0


def default_window(T: int) -> tuple[int, int]:
    """Earliest quarter of the timesteps, the deepest-backward region."""
    return (1, max(3, math.ceil(T / 4)))


def _window_points(profile: GradProfile, window: tuple[int, int] | None):
    lo, hi = window if window is not None else default_window(profile.T)
    if not (1 <= lo <= hi <= profile.T):
        raise InsufficientDataError(
            f"window ({lo}, {hi}) does not fit a profile of length {profile.T}")
    t = np.arange(lo, hi + 1)
    norms = profile.norms[lo - 1:hi]
    keep = norms > 0
    n_excluded = int(np.sum(~keep))
    if np.sum(keep) < 3:
        raise InsufficientDataError(
            f"only {int(np.sum(keep))} positive norms in window ({lo}, {hi}); "
            "need at least 3")
    return t[keep], norms[keep], (lo, hi), n_excluded


def _ols(x: Array, y: Array) -> tuple[float, float, float, bool]:
    """Least squares y ~ a + b x; returns (slope, intercept, r2, degenerate)."""
    xm, ym = x.mean(), y.mean()
    sxx = np.sum((x - xm) ** 2)
    sxy = np.sum((x - xm) * (y - ym))
    syy = np.sum((y - ym) ** 2)
    if syy == 0.0:
        # constant response: slope 0 and an undefined r2, reported as 0
        return 0.0, float(ym), 0.0, True
    slope = sxy / sxx
    ss_res = syy - slope * sxy
    r2 = 1.0 - ss_res / syy
    return float(slope), float(ym - slope * xm), float(min(max(r2, 0.0), 1.0)), False


def fit_exponential(profile: GradProfile,
                    window: tuple[int, int] | None = None) -> DecayFit:
    """Fit log norms against backward time T - t; slope < 0 means decay."""
    t, norms, win, n_excluded = _window_points(profile, window)
    s = profile.T - t
    slope, intercept, r2, degenerate = _ols(s.astype(float), np.log(norms))
    return DecayFit(EXPONENTIAL, slope, intercept, r2, win, n_excluded,
                    degenerate)


def fit_polynomial(profile: GradProfile,
                   window: tuple[int, int] | None = None) -> DecayFit:
    """Fit log norms against log(T - t + 1); slope is the power-law exponent."""
    t, norms, win, n_excluded = _window_points(profile, window)
    u = np.log(profile.T - t + 1.0)
    slope, intercept, r2, degenerate = _ols(u, np.log(norms))
    return DecayFit(POLYNOMIAL, slope, intercept, r2, win, n_excluded,
                    degenerate)


def classify_decay(profile: GradProfile,
                   window: tuple[int, int] | None = None,
                   threshold: float = R2_THRESHOLD) -> str:
    """Pick the better-fitting decay model, or "neither" below threshold."""
    fe = fit_exponential(profile, window)
    fp = fit_polynomial(profile, window)
    best = fe if fe.r_squared >= fp.r_squared else fp
    if best.r_squared >= threshold and not best.degenerate:
        return best.model
    return NEITHER


# ---------------------------------------------------------------------------
# CSV round trip (header "t,norm", one row per timestep; meta as a sidecar
# key=value file next to the CSV)
# ---------------------------------------------------------------------------

def write_profile_csv(profile: GradProfile, path) -> None:
    lines = ["t,norm"]
    for t, v in enumerate(profile.norms, start=1):
        lines.append(f"{t},{float(v)!r}")
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")
    meta = profile.meta
    pairs = {"cell_kind": meta.cell_kind, "rate_r": repr(float(meta.rate_r)),
             "epoch": "" if meta.epoch is None else str(meta.epoch),
             "seed": "" if meta.seed is None else str(meta.seed)}
    with open(f"{path}.meta", "w", newline="") as fh:
        for k in sorted(pairs):
            fh.write(f"{k}={pairs[k]}\n")


def read_profile_csv(path) -> GradProfile:
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines or lines[0] != "t,norm":
        raise FormatError(f"{path}: expected header 't,norm', got "
                          f"{lines[0]!r}" if lines else f"{path}: empty file")
    norms = []
    for k, ln in enumerate(lines[1:], start=1):
        parts = ln.split(",")
        if len(parts) != 2:
            raise FormatError(f"{path}: malformed row {k}: {ln!r}")
        try:
            t, v = int(parts[0]), float(parts[1])
        except ValueError as e:
            raise FormatError(f"{path}: malformed row {k}: {ln!r}") from e
        if t != k:
            raise FormatError(f"{path}: row {k} has timestep {t}; rows must "
                              "be consecutive from 1")
        norms.append(v)

    meta = ProfileMeta(cell_kind="unknown", rate_r=0.0)
    try:
        with open(f"{path}.meta") as fh:
            kv = dict(ln.strip().split("=", 1) for ln in fh if "=" in ln)
        meta = ProfileMeta(cell_kind=kv.get("cell_kind", "unknown"),
                           rate_r=float(kv["rate_r"]) if kv.get("rate_r") else 0.0,
                           epoch=int(kv["epoch"]) if kv.get("epoch") else None,
                           seed=int(kv["seed"]) if kv.get("seed") else None)
    except OSError:
        pass
    return GradProfile(np.asarray(norms, dtype=np.float64), meta)
