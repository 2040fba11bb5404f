"""Exact Hessian of the empirical risk and the sharpness S_t = lambda_max.

For one sample and quadratic l the Hessian splits into a rank-one curvature
term and a residual-weighted diagonal:

    H = 2 u u^T + r * diag([x, -x]),   u = [x * w_plus, -x * w_minus],

averaged over samples in the multi-sample case. The sharpness is the largest
(signed, most-positive) eigenvalue; the matrices here can be indefinite, so
this is not the spectral radius.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .losses import QUADRATIC
from .model import Dataset, DimensionMismatchError, TrajectoryLog, WeightState

#: Dense symmetric eigensolver is used up to this matrix size (2d).
DENSE_EIG_LIMIT = 64
POWER_TOL = 1e-10
POWER_MAX_ITER = 10_000


class PowerIterationError(RuntimeError):
    """Power iteration failed to converge within its iteration budget."""


def hessian(w: WeightState, data: Dataset, l=QUADRATIC) -> np.ndarray:
    """Exact second derivative of the empirical risk, shape (2d, 2d).

    Generic in the loss through l' and l'':
    H = (1/n) sum_i [ l''(r_i) g_i g_i^T + 2 l'(r_i) diag([x_i, -x_i]) ]
    with g_i = [2 x_i * w_plus, -2 x_i * w_minus].
    """
    if data.d != w.d:
        raise DimensionMismatchError(f"data has d={data.d}, weights d={w.d}")
    r = data.xs @ w.beta - data.ys
    G = np.concatenate([2.0 * data.xs * w.w_plus, -2.0 * data.xs * w.w_minus], axis=1)
    H = (G.T * np.asarray(l.deriv2(r))) @ G / data.n
    diag_coef = 2.0 * l.deriv(r)
    diag = np.concatenate([data.xs.T @ diag_coef, -(data.xs.T @ diag_coef)]) / data.n
    H[np.diag_indices_from(H)] += diag
    return H


def power_iteration_extreme(H: np.ndarray, tol: float = POWER_TOL,
                            max_iter: int = POWER_MAX_ITER) -> float:
    """Most-positive eigenvalue of a symmetric matrix by shifted power iteration.

    Shifts by a Gershgorin lower bound so the iterated matrix is PSD and the
    dominant eigenvalue is the one we want. Deterministic start vector.
    """
    m = H.shape[0]
    off = np.sum(np.abs(H), axis=1) - np.abs(np.diag(H))
    lower = np.min(np.diag(H) - off)
    shift = max(0.0, -lower)
    M = H + shift * np.eye(m)
    v = np.ones(m) + 1e-6 * np.arange(m)
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(max_iter):
        u = M @ v
        norm = np.linalg.norm(u)
        if norm == 0.0:
            return -shift if shift > 0.0 else 0.0
        u /= norm
        new_lam = float(u @ (M @ u))
        if abs(new_lam - lam) <= tol * max(1.0, abs(new_lam)):
            return new_lam - shift
        lam, v = new_lam, u
    raise PowerIterationError(
        f"no convergence after {max_iter} iterations (tol={tol})"
    )


def sharpness_of(H: np.ndarray) -> float:
    """Largest signed eigenvalue of a symmetric matrix."""
    if H.shape[0] <= DENSE_EIG_LIMIT:
        return float(np.linalg.eigvalsh(H)[-1])
    return power_iteration_extreme(H)


def sharpness(w: WeightState, data: Dataset, l=QUADRATIC) -> float:
    """S(w) = lambda_max of the risk Hessian at w."""
    return sharpness_of(hessian(w, data, l))


@dataclass(frozen=True)
class EosFlag:
    occurred: bool
    first_crossing_t: int | None


def eos_flag(trajectory: TrajectoryLog, eta: float | None = None) -> EosFlag:
    """Whether the recorded sharpness ever exceeds 2/eta, and the first such step.

    The comparison is strict; steps skipped by the recording stride (NaN) do
    not count.
    """
    if trajectory.sharpness_track is None:
        raise ValueError("trajectory was run without sharpness recording")
    if eta is None:
        eta = trajectory.eta
    track = trajectory.sharpness_track
    with np.errstate(invalid="ignore"):
        above = track > 2.0 / eta
    idx = np.nonzero(above)[0]
    if idx.size == 0:
        return EosFlag(False, None)
    return EosFlag(True, int(idx[0]))
