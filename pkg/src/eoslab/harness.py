"""Experiment layer: regime classification, phase markers, rates, sweeps.

Regime taxonomy for a completed single-sample run:

* ``divergent`` — a residual or weight escaped the divergence threshold;
* ``eos_sub`` / ``eos_super`` — converged with persistent sign alternation of
  the residual AND a sharpness crossing of 2/eta, split by mu*eta below or
  above 1;
* ``gradient_flow`` — converged without that full signature (this includes
  the transitional band that oscillates but never crosses 2/eta; the
  taxonomy would otherwise leave those runs unlabeled);
* ``periodic_k`` — bounded, non-convergent, with tail period k <= 64;
* ``chaotic`` — bounded, non-convergent, no period <= 64;
* ``inconclusive`` — the run is too short for a tail verdict (still visibly
  contracting, or not enough samples).

Phase markers, following the three-phase picture of the oscillatory regime:
``tau`` ends the monotone initial phase (first r_t >= -mu/2), ``t0`` starts
persistent sign alternation, ``frak_t`` starts the persistently positive
envelope coefficient alpha_t (the convergence phase of the supercritical
regime). Persistence means W consecutive steps (default 20, configurable).
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics import BasisContext, attach_quadruplet
from .model import Dataset, HyperParams, TrajectoryLog, WeightState, run_gd
from .sharpness import eos_flag

PERSISTENCE_WINDOW = 20
PERIOD_MAX = 64
PERIOD_REL_TOL = 1e-7
PERIOD_TAIL = 512


@dataclass(frozen=True)
class PhaseMarkers:
    tau: int | None
    t0: int | None
    frak_t: int | None


@dataclass
class RegimeReport:
    regime: str
    mu_eta: float | None = None
    tau: int | None = None
    t0: int | None = None
    frak_t: int | None = None
    rate: float | None = None
    beta_inf: np.ndarray | None = None
    error_norm: float | None = None
    eos_crossing: int | None = None
    period: int | None = None
    termination: str = ""
    note: str = ""

    @property
    def is_eos(self) -> bool:
        return self.regime in ("eos_sub", "eos_super")


@dataclass
class SweepResult:
    axis: str
    grid: np.ndarray
    reports: list
    errors: np.ndarray

    def regimes(self) -> list:
        return [rep.regime for rep in self.reports]


class InconclusiveTrajectoryError(ValueError):
    """The trajectory is too short for the requested analysis."""


# ---------------------------------------------------------------------------
# helpers on residual series
# ---------------------------------------------------------------------------

def _first_persistent(flags: np.ndarray, window: int) -> int | None:
    """Smallest index i such that flags[i : i + window] are all true."""
    if flags.size < window:
        return None
    run = 0
    for i, v in enumerate(flags):
        run = run + 1 if v else 0
        if run >= window:
            return i - window + 1
    return None


def alternation_onset(r: np.ndarray, window: int = PERSISTENCE_WINDOW) -> int | None:
    """First step from which r_t * r_{t+1} < 0 holds for `window` pairs."""
    if r.size < 2:
        return None
    return _first_persistent(r[:-1] * r[1:] < 0.0, window)


def canonical_mu_eta(data: Dataset, eta: float) -> float | None:
    """Scale-equivalent mu*eta of a general single-sample problem.

    Rescaling x = c * (1, x_hat) maps the run onto the normalized geometry
    with effective step c^2 * eta and target y / c, so mu*eta = eta * y * c
    with c the largest-magnitude coordinate. Returns None for multi-sample
    data, where the reduction does not apply.
    """
    if data.n != 1:
        return None
    x = data.xs[0]
    c = x[np.argmax(np.abs(x))]
    if c == 0.0:
        return None
    return float(eta * data.ys[0] * c)


def detect_period(r: np.ndarray, burn_in: int, max_period: int = PERIOD_MAX,
                  rel_tol: float = PERIOD_REL_TOL, tail_len: int = PERIOD_TAIL) -> int | None:
    """Smallest lag k <= max_period with tail self-distance below rel_tol."""
    tail = r[burn_in:]
    if tail.size > tail_len:
        tail = tail[-tail_len:]
    if tail.size < 2 * max_period:
        return None
    scale = float(np.max(np.abs(tail)))
    if scale == 0.0 or not math.isfinite(scale):
        return None
    for k in range(1, max_period + 1):
        if float(np.max(np.abs(tail[k:] - tail[:-k]))) <= rel_tol * scale:
            return k
    return None


# ---------------------------------------------------------------------------
# markers
# ---------------------------------------------------------------------------

def detect_phase_markers(traj: TrajectoryLog, ctx: BasisContext,
                         window: int = PERSISTENCE_WINDOW) -> PhaseMarkers:
    """(tau, t0, frak_t) for a d = 2 single-sample trajectory.

    frak_t needs the quadruplet envelope coefficient, so the trajectory must
    record weights at stride 1 (the d <= 4 default).
    """
    r = traj.r
    below = r >= -ctx.mu / 2.0
    idx = np.nonzero(below)[0]
    tau = int(idx[0]) if idx.size else None

    t0 = alternation_onset(r, window)

    quad = attach_quadruplet(traj, ctx)
    if quad.t.size and not np.all(np.diff(quad.t) == 1):
        raise ValueError("frak_t detection requires weight recording at stride 1")
    pos = quad.alpha_diag > 0.0
    frak_rel = _first_persistent(pos, window)
    frak_t = int(quad.t[frak_rel]) if frak_rel is not None else None
    return PhaseMarkers(tau, t0, frak_t)


# ---------------------------------------------------------------------------
# rate and limit estimation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RateEstimate:
    """Fitted two-step contraction of the residual envelope.

    ``factor`` is exp(2 * slope) of the least-squares line through
    log|r_t| on the even-offset subsequence past the marker; a factor close
    to 1 means the envelope is not contracting.
    """

    factor: float
    slope_per_step: float
    n_points: int

    @property
    def converging(self) -> bool:
        return self.factor < 0.999


def estimate_rate(traj: TrajectoryLog, from_marker: int,
                  skip_end: int = 10, floor: float = 1e-14) -> RateEstimate:
    """Least-squares two-step contraction factor of |r| past a marker.

    Uses the even-offset subsequence (consecutive residuals alternate sign in
    the oscillatory regime, so fitting all steps would alias the oscillation)
    and drops the last `skip_end` steps plus anything at the floating-point
    floor.
    """
    r = traj.r
    idx = np.arange(from_marker, max(from_marker, r.size - skip_end), 2)
    vals = np.abs(r[idx])
    keep = vals > floor
    idx, vals = idx[keep], vals[keep]
    if idx.size < 10:
        raise InconclusiveTrajectoryError(
            f"only {idx.size} usable points past t={from_marker}"
        )
    coeffs = np.polyfit(idx.astype(float), np.log(vals), 1)
    slope = float(coeffs[0])
    return RateEstimate(factor=math.exp(2.0 * slope), slope_per_step=slope,
                        n_points=int(idx.size))


def predicted_two_step_factor(mu_eta: float) -> float:
    """Envelope contraction predicted for the subcritical oscillatory regime.

    The two-step bound r_{t+2} >= (1 - alpha_t)(1 - alpha_{t+1}) r_t together
    with alpha_t >= 2(1 - mu*eta) gives |r_{t+2}| <= (2*mu*eta - 1)^2 |r_t|,
    which is also the squared transversal multiplier of the fixed line at
    s = 0.
    """
    return (2.0 * mu_eta - 1.0) ** 2


INTERPOLATION_TOL = 1e-8


def limit_and_error(traj: TrajectoryLog, data: Dataset | None = None
                    ) -> tuple[np.ndarray, float]:
    """(beta_inf, ||beta_inf - beta_star||) of a converged run.

    Raises on non-converged input and asserts that the limit interpolates
    every sample to 1e-8.
    """
    if data is None:
        data = traj.data
    if not traj.converged():
        raise ValueError(
            f"limit undefined: trajectory terminated with {traj.termination_reason!r}"
        )
    beta_inf = traj.final_weights.beta
    gap = np.max(np.abs(data.xs @ beta_inf - data.ys))
    if gap >= INTERPOLATION_TOL:
        raise AssertionError(f"limit fails to interpolate: max gap {gap:.3e}")
    return beta_inf, float(np.linalg.norm(beta_inf - data.beta_star))


# ---------------------------------------------------------------------------
# classification
# ---------------------------------------------------------------------------

def classify(traj: TrajectoryLog, ctx: BasisContext | None = None,
             window: int = PERSISTENCE_WINDOW) -> RegimeReport:
    """Classify a completed single-sample trajectory.

    With a `BasisContext` the full phase markers (tau, t0, frak_t) are
    attached; without one, t0 comes from the raw residual series and the
    mu*eta split falls back to the scale-equivalent value of the data.
    """
    if traj.data.n != 1:
        raise ValueError("classification is defined for single-sample runs")
    r = traj.r
    term = traj.termination_reason
    mu_eta = ctx.mu_eta if ctx is not None else canonical_mu_eta(traj.data, traj.eta)

    markers = PhaseMarkers(None, None, None)
    if ctx is not None:
        markers = detect_phase_markers(traj, ctx, window)
    else:
        markers = PhaseMarkers(None, alternation_onset(r, window), None)

    report = RegimeReport(regime="inconclusive", mu_eta=mu_eta, tau=markers.tau,
                          t0=markers.t0, frak_t=markers.frak_t, termination=term)

    if term in ("diverged", "non_finite"):
        report.regime = "divergent"
        return report

    flag = None
    if traj.sharpness_track is not None:
        flag = eos_flag(traj)
        report.eos_crossing = flag.first_crossing_t if flag.occurred else None

    if term == "converged":
        beta_inf, err = limit_and_error(traj)
        report.beta_inf, report.error_norm = beta_inf, err
        alternating = markers.t0 is not None
        crossed = flag is not None and flag.occurred
        if alternating and crossed:
            if mu_eta is None:
                report.regime = "eos_sub"
                report.note = "mu*eta unavailable; defaulting to the subcritical label"
            else:
                report.regime = "eos_super" if mu_eta > 1.0 else "eos_sub"
            if markers.t0 is not None:
                try:
                    report.rate = estimate_rate(traj, markers.t0).factor
                except InconclusiveTrajectoryError:
                    pass
        else:
            report.regime = "gradient_flow"
        return report

    # bounded, non-convergent: tail analysis
    burn_in = int(0.8 * r.size)
    if markers.frak_t is not None:
        burn_in = max(burn_in, markers.frak_t)
    tail = np.abs(r[burn_in:])
    if tail.size < 2 * PERIOD_MAX:
        report.note = "trajectory too short for tail analysis"
        return report
    period = detect_period(r, burn_in)
    if period is not None and period > 1:
        report.regime = f"periodic_{period}"
        report.period = period
        return report
    if period == 1:
        # a constant nonzero tail is a stalled run, not an orbit
        report.note = "tail constant at period-detection resolution"
        return report
    half = tail.size // 2
    if np.max(tail[half:]) < 0.9 * np.max(tail[:half]):
        report.note = "tail still contracting; not converged within max_steps"
        return report
    report.regime = "chaotic"
    return report


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------

def eta_grid_per_decade(lo: float, hi: float, per_decade: int = 40) -> np.ndarray:
    """Geometric grid with a fixed point density per decade."""
    if not 0 < lo < hi:
        raise ValueError("need 0 < lo < hi")
    n = max(2, int(math.ceil(per_decade * math.log10(hi / lo))) + 1)
    return np.geomspace(lo, hi, n)


def _run_point(data: Dataset, eta: float, alpha: float, hp_base: HyperParams | None,
               init: WeightState | None, window: int) -> RegimeReport:
    if hp_base is None:
        hp = HyperParams(eta=eta, alpha=alpha)
    else:
        hp = dataclasses.replace(hp_base, eta=eta, alpha=alpha)
    w0 = init if init is not None else WeightState.scaled_init(data.d, alpha)
    traj = run_gd(w0, data, hp)
    ctx = None
    if data.n == 1 and data.d == 2 and data.xs[0, 0] == 1.0 and 0.0 < data.xs[0, 1] < 1.0:
        ctx = BasisContext.from_dataset(data, eta)
    return classify(traj, ctx, window)


def sweep_eta(data: Dataset, alpha: float, eta_grid, hp_base: HyperParams | None = None,
              init: WeightState | None = None,
              window: int = PERSISTENCE_WINDOW) -> SweepResult:
    """One classified run per eta; deterministic for fixed inputs."""
    grid = np.asarray(eta_grid, dtype=float)
    if grid.size == 0 or np.any(np.diff(grid) <= 0):
        raise ValueError("eta grid must be nonempty and strictly increasing")
    reports = [_run_point(data, float(e), alpha, hp_base, init, window) for e in grid]
    errors = np.array([rep.error_norm if rep.error_norm is not None else np.nan
                       for rep in reports])
    return SweepResult("eta", grid, reports, errors)


def sweep_alpha(data: Dataset, eta: float, alpha_grid, hp_base: HyperParams | None = None,
                window: int = PERSISTENCE_WINDOW) -> SweepResult:
    """One classified run per initialization scale; init is alpha-scaled."""
    grid = np.asarray(alpha_grid, dtype=float)
    if grid.size == 0 or np.any(np.diff(grid) <= 0):
        raise ValueError("alpha grid must be nonempty and strictly increasing")
    reports = [_run_point(data, eta, float(a), hp_base, None, window) for a in grid]
    errors = np.array([rep.error_norm if rep.error_norm is not None else np.nan
                       for rep in reports])
    return SweepResult("alpha", grid, reports, errors)


# ---------------------------------------------------------------------------
# multi-sample overparameterization experiment
# ---------------------------------------------------------------------------

@dataclass
class MultiSamplePoint:
    eta: float
    termination: str
    crossed: bool
    first_crossing_t: int | None
    eos_converged: bool


@dataclass
class MultiSampleReport:
    d: int
    n: int
    k: int
    seed: int
    points: list = field(default_factory=list)

    @property
    def any_eos(self) -> bool:
        return any(p.eos_converged for p in self.points)


def multi_sample_eos_experiment(d: int, n: int, k: int, eta_grid, seed: int,
                                alpha: float = 0.01, max_steps: int = 30_000,
                                sharpness_stride: int | None = None) -> MultiSampleReport:
    """For each eta, run multi-sample GD and record whether EoS convergence
    (a 2/eta sharpness crossing followed by eventual convergence) occurs."""
    from .model import generate_dataset

    data = generate_dataset(d, n, k, seed)
    report = MultiSampleReport(d=d, n=n, k=k, seed=seed)
    for eta in np.asarray(eta_grid, dtype=float):
        hp = HyperParams(eta=float(eta), alpha=alpha, max_steps=max_steps,
                         sharpness_stride=sharpness_stride)
        traj = run_gd(WeightState.scaled_init(d, alpha), data, hp)
        flag = eos_flag(traj)
        report.points.append(MultiSamplePoint(
            eta=float(eta),
            termination=traj.termination_reason,
            crossed=flag.occurred,
            first_crossing_t=flag.first_crossing_t,
            eos_converged=flag.occurred and traj.converged(),
        ))
    return report
