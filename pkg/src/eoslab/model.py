"""Weight-space model: data, loss, analytic gradient, and the GD iteration.

The regression weight is quadratically parameterized as
``beta = w_plus**2 - w_minus**2`` (coordinate-wise squares) and trained by
constant step-size gradient descent on the empirical risk
``L(w) = (1/n) * sum_i l(<x_i, beta_w> - y_i)`` with ``l(a) = a**2 / 4``.

Datasets are either user-supplied or generated with a seeded PCG64 generator
(`numpy.random.default_rng`): Gaussian inputs ``x_i ~ N(0, I_d)`` and targets
``y_i = <x_i, beta_star>`` with a k-sparse sign prior scaled by 1/sqrt(k).
Reproducibility is at the level of the documented generator; bit-exact
equality across numpy versions or platforms is not promised.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .losses import QUADRATIC

#: Residual tolerance below which a step counts toward the convergence window.
CONVERGENCE_TOL = 1e-10
#: Number of consecutive in-tolerance steps required to declare convergence.
#: A single-step check is not enough: oscillating trajectories can graze zero.
CONVERGENCE_WINDOW = 20
#: |r| or |weight| beyond this is treated as divergence.
DIVERGENCE_THRESHOLD = 1e8


class DimensionMismatchError(ValueError):
    """Raised when weights and data disagree on the ambient dimension."""


@dataclass(frozen=True)
class Dataset:
    """Samples ``(x_i, y_i)`` plus the sparse prior ``beta_star``.

    ``xs`` has shape (n, d), ``ys`` shape (n,), ``beta_star`` shape (d,).
    """

    xs: np.ndarray
    ys: np.ndarray
    beta_star: np.ndarray

    def __post_init__(self):
        xs = np.atleast_2d(np.asarray(self.xs, dtype=float))
        ys = np.atleast_1d(np.asarray(self.ys, dtype=float))
        bs = np.atleast_1d(np.asarray(self.beta_star, dtype=float))
        if xs.shape[0] != ys.shape[0]:
            raise DimensionMismatchError(
                f"{xs.shape[0]} inputs but {ys.shape[0]} targets"
            )
        if xs.shape[1] != bs.shape[0]:
            raise DimensionMismatchError(
                f"inputs have d={xs.shape[1]} but beta_star has d={bs.shape[0]}"
            )
        if xs.shape[0] < 1:
            raise ValueError("need at least one sample")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)
        object.__setattr__(self, "beta_star", bs)

    @property
    def n(self) -> int:
        return self.xs.shape[0]

    @property
    def d(self) -> int:
        return self.xs.shape[1]

    @classmethod
    def single(cls, x, y, beta_star=None) -> "Dataset":
        """One-sample dataset; ``beta_star`` defaults to zeros."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if beta_star is None:
            beta_star = np.zeros_like(x)
        return cls(x[None, :], np.array([float(y)]), beta_star)

    @classmethod
    def canonical_2d(cls, x: float, mu: float) -> "Dataset":
        """The normalized two-coordinate setup: input (1, x), target mu,
        1-sparse prior (mu, 0)."""
        return cls.single(np.array([1.0, float(x)]), float(mu),
                          np.array([float(mu), 0.0]))


def generate_dataset(d: int, n: int, k: int, rng_seed: int) -> Dataset:
    """Seeded Gaussian dataset with an exactly k-sparse sign prior.

    ``x_i ~ N(0, I_d)`` and ``y_i = <x_i, beta_star>`` exactly; the prior has
    k nonzero entries, each +-1/sqrt(k), on a uniformly chosen support.
    """
    if not 1 <= k <= d:
        raise ValueError(f"need 1 <= k <= d, got k={k}, d={d}")
    if n < 1:
        raise ValueError(f"need n >= 1, got n={n}")
    rng = np.random.default_rng(rng_seed)
    xs = rng.standard_normal((n, d))
    support = rng.choice(d, size=k, replace=False)
    signs = rng.choice(np.array([-1.0, 1.0]), size=k)
    beta_star = np.zeros(d)
    beta_star[support] = signs / np.sqrt(k)
    return Dataset(xs, xs @ beta_star, beta_star)


@dataclass(frozen=True)
class WeightState:
    """Trainable pair (w_plus, w_minus), both length d."""

    w_plus: np.ndarray
    w_minus: np.ndarray

    def __post_init__(self):
        wp = np.atleast_1d(np.asarray(self.w_plus, dtype=float))
        wm = np.atleast_1d(np.asarray(self.w_minus, dtype=float))
        if wp.shape != wm.shape:
            raise DimensionMismatchError("w_plus and w_minus differ in shape")
        object.__setattr__(self, "w_plus", wp)
        object.__setattr__(self, "w_minus", wm)

    @property
    def d(self) -> int:
        return self.w_plus.shape[0]

    @property
    def beta(self) -> np.ndarray:
        return self.w_plus**2 - self.w_minus**2

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.w_plus)) and np.all(np.isfinite(self.w_minus)))

    @classmethod
    def scaled_init(cls, d: int, alpha: float) -> "WeightState":
        """Standard scaling initialization w_plus = w_minus = alpha * 1."""
        return cls(np.full(d, float(alpha)), np.full(d, float(alpha)))

    @classmethod
    def asymmetric_init(cls, d: int, alpha: float) -> "WeightState":
        """w_plus = 2 alpha * 1, w_minus = alpha * 1; used for y = 0 data,
        where the symmetric start pins the residual at zero forever."""
        return cls(np.full(d, 2.0 * float(alpha)), np.full(d, float(alpha)))


@dataclass(frozen=True)
class HyperParams:
    eta: float
    alpha: float
    max_steps: int = 100_000
    divergence_threshold: float = DIVERGENCE_THRESHOLD
    rng_seed: int = 0
    convergence_tol: float = CONVERGENCE_TOL
    convergence_window: int = CONVERGENCE_WINDOW
    weight_stride: int | None = None     # None: 1 for d <= 4, else 10
    sharpness_stride: int | None = None  # None: same policy as weights

    def __post_init__(self):
        if self.eta <= 0:
            raise ValueError("eta must be positive")
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")
        if self.divergence_threshold <= 0:
            raise ValueError("divergence_threshold must be positive")

    def stride_for(self, d: int) -> int:
        if self.weight_stride is not None:
            return max(1, int(self.weight_stride))
        return 1 if d <= 4 else 10

    def sharpness_stride_for(self, d: int) -> int:
        if self.sharpness_stride is not None:
            return max(1, int(self.sharpness_stride))
        return 1 if d <= 4 else 10


def residual(w: WeightState, x, y) -> float:
    """Signed interpolation error <beta_w, x> - y for one sample."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape[0] != w.d:
        raise DimensionMismatchError(f"sample has d={x.shape[0]}, weights d={w.d}")
    return float(w.beta @ x - y)


def residuals(w: WeightState, data: Dataset) -> np.ndarray:
    """Residual vector over all samples."""
    if data.d != w.d:
        raise DimensionMismatchError(f"data has d={data.d}, weights d={w.d}")
    return data.xs @ w.beta - data.ys


def loss(w: WeightState, data: Dataset, l=QUADRATIC) -> float:
    """Empirical risk (1/n) * sum_i l(r_i)."""
    r = residuals(w, data)
    return float(np.mean(l.value(r)))


def gradient(w: WeightState, data: Dataset, l=QUADRATIC) -> np.ndarray:
    """Exact analytic gradient, concatenated as [d/dw_plus; d/dw_minus].

    One sample, quadratic l: top block r * (x * w_plus), bottom block
    -r * (x * w_minus); multiple samples average.
    """
    r = residuals(w, data)
    coef = 2.0 * l.deriv(r)  # equals r for the quadratic loss
    top = (coef[:, None] * data.xs * w.w_plus).mean(axis=0)
    bot = -(coef[:, None] * data.xs * w.w_minus).mean(axis=0)
    return np.concatenate([top, bot])


def gd_step(w: WeightState, data: Dataset, eta: float, l=QUADRATIC) -> WeightState:
    """One constant step-size GD update w - eta * grad L(w)."""
    g = gradient(w, data, l)
    d = w.d
    return WeightState(w.w_plus - eta * g[:d], w.w_minus - eta * g[d:])


@dataclass
class TrajectoryLog:
    """Per-step record of a GD run.

    ``residual_track[t]`` is the residual vector at step t (before the t-th
    update); ``sharpness_track`` carries NaN at steps where the sharpness was
    not evaluated (stride). ``weights`` holds (t, WeightState) snapshots at
    the recording stride plus the final state.
    """

    steps: np.ndarray
    residual_track: np.ndarray
    loss_track: np.ndarray
    sharpness_track: np.ndarray | None
    weights: list
    final_weights: WeightState
    termination_reason: str
    eta: float
    data: Dataset
    hp: HyperParams

    @property
    def n_steps(self) -> int:
        return int(self.steps.shape[0])

    @property
    def r(self) -> np.ndarray:
        """Scalar residual series; only defined for single-sample runs."""
        if self.residual_track.shape[1] != 1:
            raise ValueError("scalar residual series requires a single-sample run")
        return self.residual_track[:, 0]

    @property
    def max_abs_residual(self) -> np.ndarray:
        return np.max(np.abs(self.residual_track), axis=1)

    def converged(self) -> bool:
        return self.termination_reason == "converged"


def run_gd(init: WeightState, data: Dataset, hp: HyperParams,
           record_sharpness: bool = True, l=QUADRATIC) -> TrajectoryLog:
    """Iterate gd_step until max_steps, convergence, or divergence.

    Convergence: max_i |r_i| < convergence_tol for convergence_window
    consecutive steps. Divergence: any |r_i| or |weight| beyond
    divergence_threshold. Non-finite values terminate with reason
    ``non_finite``. The log is complete up to the terminating step.
    """
    from .sharpness import hessian  # local import to avoid a cycle

    if data.d != init.d:
        raise DimensionMismatchError(f"data has d={data.d}, init d={init.d}")
    wp = init.w_plus.copy()
    wm = init.w_minus.copy()
    xs, ys = data.xs, data.ys
    eta = hp.eta
    stride = hp.stride_for(data.d)
    s_stride = hp.sharpness_stride_for(data.d)

    res, losses, sharps, weights = [], [], [], []
    reason = "max_steps"
    in_tol = 0
    for t in range(hp.max_steps):
        beta = wp**2 - wm**2
        r = xs @ beta - ys
        if not (np.all(np.isfinite(r)) and np.all(np.isfinite(wp)) and np.all(np.isfinite(wm))):
            reason = "non_finite"
            break
        res.append(r)
        losses.append(np.mean(l.value(r)))
        state = WeightState(wp.copy(), wm.copy())
        if record_sharpness and t % s_stride == 0:
            h = hessian(state, data, l)
            sharps.append(float(np.linalg.eigvalsh(h)[-1]))
        else:
            sharps.append(np.nan)
        if t % stride == 0:
            weights.append((t, state))

        if np.max(np.abs(r)) > hp.divergence_threshold or \
           max(np.max(np.abs(wp)), np.max(np.abs(wm))) > hp.divergence_threshold:
            reason = "diverged"
            break
        if np.max(np.abs(r)) < hp.convergence_tol:
            in_tol += 1
            if in_tol >= hp.convergence_window:
                reason = "converged"
                break
        else:
            in_tol = 0

        # identical expressions to gradient(), so logs are bit-reproducible
        coef = 2.0 * l.deriv(r)
        wp = wp - eta * (coef[:, None] * xs * wp).mean(axis=0)
        wm = wm + eta * (coef[:, None] * xs * wm).mean(axis=0)

    final = WeightState(wp, wm)
    T = len(res)
    return TrajectoryLog(
        steps=np.arange(T),
        residual_track=np.asarray(res).reshape(T, data.n),
        loss_track=np.asarray(losses),
        sharpness_track=np.asarray(sharps) if record_sharpness else None,
        weights=weights,
        final_weights=final,
        termination_reason=reason,
        eta=eta,
        data=data,
        hp=hp,
    )
