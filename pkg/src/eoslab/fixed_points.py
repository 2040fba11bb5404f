"""Closed-form analysis of the reduced 2-D map and the scalar toy oscillator.

The reduced map acts on (r, s) with parameters (mu, eta, x):

    g(r, s) = -(2*mu*eta - 1)*r - (2*eta - mu*eta^2)*r^2 + eta^2*r^3
              + 2*r*s - (1 + x)*eta*r^2*s
    h(r, s) = s * (1 - x*eta*r)^2

Objects provided: the auxiliary s = 0 restriction and its 2-cycle, the fixed
points of (g, h), the non-trivial 2-periodic pair with its reality condition,
the analytic Jacobian and its spectrum, the rejected 2-cycle candidate
families (diagnostics), and the toy iteration
r_{t+1} = -(1 - alpha_t) * r_t - beta_t * r_t^2 with schedule support.

Conventions worth noting:

* The fixed line (0, s) always carries Jacobian eigenvalues {1 - 2*mu*eta + 2*s, 1};
  the eigenvalue 1 is the neutral direction along the line itself, and the
  transversal multiplier 1 - 2*mu*eta + 2*s decides stability
  (|.| < 1 iff s in (mu*eta - 1, mu*eta)).
* The genuine 2-periodic points pair the r root carrying -sqrt(D) with the s
  root carrying -sqrt(D) swapped, i.e. the realized orbit is
  {(r_plus, s_minus), (r_minus, s_plus)} in the naming used below; one
  application of (g, h) exchanges the two points (verified to 1e-10 in tests).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

#: Upper end of the mu*eta window in which the two-phase convergence analysis
#: of the super-critical regime applies: (3*sqrt(2) - 2) / 2 ~= 1.1213.
THETA_TWO_CYCLE = (3.0 * math.sqrt(2.0) - 2.0) / 2.0

#: Residual tolerance used when certifying periodic points by map application.
CERTIFY_TOL = 1e-10


@dataclass(frozen=True)
class MapParams:
    """Parameters (mu, eta, x) of the reduced map."""

    mu: float
    eta: float
    x: float

    def __post_init__(self):
        if self.eta <= 0:
            raise ValueError("eta must be positive")

    @property
    def mu_eta(self) -> float:
        return self.mu * self.eta

    @property
    def x_threshold(self) -> float:
        """The critical 1/(mu*eta) separating convergent from 2-cycle locking."""
        return 1.0 / self.mu_eta

    @property
    def regime_bucket(self) -> str:
        me = self.mu_eta
        if me < 1.0:
            return "subcritical"
        if me <= THETA_TWO_CYCLE:
            return "supercritical"
        return "beyond_two_cycle_window"

    def g(self, r, s):
        mu, eta, x = self.mu, self.eta, self.x
        return (-(2.0 * mu * eta - 1.0) * r
                - (2.0 * eta - mu * eta**2) * r**2
                + eta**2 * r**3
                + 2.0 * r * s
                - (1.0 + x) * eta * r**2 * s)

    def h(self, r, s):
        return s * (1.0 - self.x * self.eta * r) ** 2

    def step(self, point):
        r, s = point
        return (self.g(r, s), self.h(r, s))

    def jacobian(self, r: float, s: float) -> np.ndarray:
        """Analytic Jacobian of (g, h); hand-differentiated degree-3 polynomials."""
        mu, eta, x = self.mu, self.eta, self.x
        g_r = (-(2.0 * mu * eta - 1.0)
               - 2.0 * (2.0 * eta - mu * eta**2) * r
               + 3.0 * eta**2 * r**2
               + 2.0 * s
               - 2.0 * (1.0 + x) * eta * r * s)
        g_s = 2.0 * r - (1.0 + x) * eta * r**2
        h_r = -2.0 * x * eta * s + 2.0 * x**2 * eta**2 * r * s
        h_s = (1.0 - x * eta * r) ** 2
        return np.array([[g_r, g_s], [h_r, h_s]])


@dataclass(frozen=True)
class PeriodicPair:
    """Fixed points or a 2-cycle of (g, h) with a reality marker.

    For ``kind == "fixed"`` the list holds the non-trivial point; the whole
    line (0, s) is also fixed and flagged by ``trivial_line``. For
    ``kind == "two_cycle"`` the two points swap under one map application.
    """

    kind: str
    points: tuple
    real: bool
    trivial_line: bool = False


def aux_map(rho: float, params: MapParams) -> float:
    """The s = 0 restriction g(rho, 0) driving the envelope of r."""
    return params.g(rho, 0.0)


def aux_stationary_points(params: MapParams) -> tuple[float, float]:
    """(local maximum, local minimum) abscissae of g(., 0):
    -(2*mu*eta - 1)/(3*eta) and 1/eta."""
    return (-(2.0 * params.mu_eta - 1.0) / (3.0 * params.eta), 1.0 / params.eta)


def aux_two_periodic(params: MapParams) -> tuple[complex, complex, bool]:
    """2-periodic pair rho_+/- of g(., 0).

    rho_+- = (1 - mu*eta +- sqrt(mu^2*eta^2 + 2*mu*eta - 3)) / (2*eta); the
    discriminant is nonnegative exactly for mu*eta >= 1.
    """
    me = params.mu_eta
    disc = me**2 + 2.0 * me - 3.0
    root = complex(disc) ** 0.5
    rho_p = (1.0 - me + root) / (2.0 * params.eta)
    rho_m = (1.0 - me - root) / (2.0 * params.eta)
    real = disc >= 0.0
    if real:
        return (rho_p.real, rho_m.real, True)
    return (rho_p, rho_m, False)


def fixed_points(params: MapParams) -> PeriodicPair:
    """Fixed points of (g, h): the line (0, s) plus the non-trivial point
    (2/(eta*x), (1 - x)*(2 + x*mu*eta)/x)."""
    if params.x == 0.0:
        raise ValueError("the non-trivial fixed point is undefined at x = 0")
    eta, x = params.eta, params.x
    r = 2.0 / (eta * x)
    s = (1.0 - x) * (2.0 + x * params.mu_eta) / x
    return PeriodicPair(kind="fixed", points=((r, s),), real=True, trivial_line=True)


def two_periodic_points(params: MapParams) -> PeriodicPair:
    """The non-trivial 2-cycle of (g, h) in the domain s in (0, mu*eta - 1).

    With D = (mu*eta*x + 1)^2 - 4 = mu^2*eta^2*x^2 + 2*mu*eta*x - 3:

        r_a = (1 - mu*eta*x - sqrt(D)) / (2*eta*x),  s_a = (1-x)(mu*eta*x + 1 - sqrt(D)) / (2x)
        r_b = (1 - mu*eta*x + sqrt(D)) / (2*eta*x),  s_b = (1-x)(mu*eta*x + 1 + sqrt(D)) / (2x)

    and the cycle is {(r_a, s_a), (r_b, s_b)}. Real exactly when D >= 0,
    i.e. x >= 1/(mu*eta) for positive parameters; the two points coincide at
    the threshold.
    """
    if params.x == 0.0:
        raise ValueError("2-periodic points are undefined at x = 0")
    eta, x = params.eta, params.x
    mex = params.mu_eta * x
    disc = (mex + 1.0) ** 2 - 4.0
    real = disc >= 0.0
    root = complex(disc) ** 0.5
    r_a = (1.0 - mex - root) / (2.0 * eta * x)
    s_a = (1.0 - x) * (mex + 1.0 - root) / (2.0 * x)
    r_b = (1.0 - mex + root) / (2.0 * eta * x)
    s_b = (1.0 - x) * (mex + 1.0 + root) / (2.0 * x)
    if real:
        pts = ((r_a.real, s_a.real), (r_b.real, s_b.real))
    else:
        pts = ((r_a, s_a), (r_b, s_b))
    return PeriodicPair(kind="two_cycle", points=pts, real=real)


def jacobian_spectrum(point, params: MapParams) -> tuple:
    """Eigenvalues of the analytic Jacobian at a point, sorted by |.| descending.

    On the fixed line (0, s) this returns {1 - 2*mu*eta + 2*s, 1}: the second
    eigenvalue is the neutral direction along the line of fixed points, the
    first is the transversal multiplier that decides stability.
    """
    lam = np.linalg.eigvals(params.jacobian(point[0], point[1]))
    order = np.argsort(-np.abs(lam))
    lam = lam[order]
    out = []
    for z in lam:
        out.append(float(z.real) if abs(z.imag) < 1e-12 else complex(z))
    return tuple(out)


def fixed_line_multiplier(s: float, params: MapParams) -> float:
    """Transversal multiplier 1 - 2*mu*eta + 2*s of the fixed line (0, s);
    stable (|.| < 1) exactly for s in (mu*eta - 1, mu*eta)."""
    return 1.0 - 2.0 * params.mu_eta + 2.0 * s


@dataclass(frozen=True)
class CandidateCycle:
    """One rejected 2-cycle candidate family, for diagnostics.

    ``points`` holds the evaluated (r, s) pairs (complex allowed);
    ``rejection`` is one of {"complex", "s_negative", "s_above_domain"};
    ``on_cycle`` reports whether the evaluated pair actually satisfies the
    composed map to 1e-8 (the printed closed forms of two families do not,
    see the docstring).
    """

    label: str
    points: tuple
    real: bool
    rejection: str
    on_cycle: bool


def _composed_residual(params: MapParams, point) -> float:
    p1 = params.step(point)
    p2 = params.step(p1)
    return max(abs(p2[0] - point[0]), abs(p2[1] - point[1]))


def rejected_two_cycle_candidates(params: MapParams) -> list[CandidateCycle]:
    """The candidate 2-cycle families eliminated from the domain (0, mu*eta - 1).

    Families are labelled "A" through "D". Family A is a genuine 2-cycle of
    the map but lives far above the admissible s range (s > 2*sqrt(2) >
    mu*eta - 1). Families B and C carry s values outside the domain (one of
    family B's s is negative; family C's smaller branch exceeds
    (mu*eta + 1)/(1 - x)^2); for these two the closed forms below reproduce
    the r coordinates of true cycles but not the s coordinates, so
    ``on_cycle`` is False for them (see tests). Family D is always complex:
    its radicand mu^2*eta^2*x^2 + 2*mu*eta*x - 7 is negative for
    mu*eta in [0, 2] and x in [0, 1].
    """
    mu, eta, x = params.mu, params.eta, params.x
    if x in (0.0, 1.0):
        raise ValueError("candidate families are undefined at x in {0, 1}")
    me = mu * eta
    out = []

    root_a = math.sqrt(x**2 + 1.0)
    ra = ((x + 1.0 - root_a) / (eta * x), (x + 1.0 + root_a) / (eta * x))
    sa = ((me * x + x**2 + x + 2.0) * (1.0 / x + 1.0 / root_a),
          (me * x + x**2 + x + 2.0) * (1.0 / x - 1.0 / root_a))
    pts_a = ((ra[0], sa[0]), (ra[1], sa[1]))
    out.append(CandidateCycle(
        label="A", points=pts_a, real=True, rejection="s_above_domain",
        on_cycle=all(_composed_residual(params, p) < 1e-8 for p in pts_a),
    ))

    root_b = math.sqrt(x**2 - 2.0 * x + 2.0)
    rb = ((x - root_b) / (eta * x - eta), (x + root_b) / (eta * x - eta))
    fac_b = me * (x - 1.0) + x**2 - x + 2.0
    sb = (fac_b * (x**2 - x + 1.0 + x * eta * root_b) / (x - 1.0) ** 3,
          fac_b * (x**2 - x + 1.0 - x * eta * root_b) / (x - 1.0) ** 3)
    pts_b = ((rb[0], sb[0]), (rb[1], sb[1]))
    out.append(CandidateCycle(
        label="B", points=pts_b, real=True,
        rejection="s_negative" if min(sb) < 0.0 else "s_above_domain",
        on_cycle=all(_composed_residual(params, p) < 1e-8 for p in pts_b),
    ))

    rad_c = 2.0 * x**2 - 2.0 * x + 1.0
    root_c = math.sqrt(rad_c)
    rc = ((1.0 + root_c) / (eta * (1.0 - x) * x), (1.0 - root_c) / (eta * (1.0 - x) * x))
    rad_cs = 1.0 + 2.0 * x - 2.0 * x**2
    root_cs = math.sqrt(rad_cs) if rad_cs >= 0 else complex(rad_cs) ** 0.5
    fac_c = x * (1.0 - x) * (me - 1.0) + 2.0
    sc = ((1.0 + 2.0 * x - 2.0 * x**2 - x * root_cs) * fac_c / ((1.0 - x) ** 3 * x),
          (1.0 + 2.0 * x - 2.0 * x**2 + x * root_cs) * fac_c / ((1.0 - x) ** 3 * x))
    pts_c = ((rc[0], sc[0]), (rc[1], sc[1]))
    real_c = rad_cs >= 0
    out.append(CandidateCycle(
        label="C", points=pts_c, real=real_c,
        rejection="s_above_domain" if real_c else "complex",
        on_cycle=real_c and all(_composed_residual(params, p) < 1e-8 for p in pts_c),
    ))

    rad_d = me**2 * x**2 + 2.0 * me * x - 7.0
    out.append(CandidateCycle(
        label="D", points=(), real=rad_d >= 0.0, rejection="complex",
        on_cycle=False,
    ))
    return out


# ---------------------------------------------------------------------------
# Toy oscillator
# ---------------------------------------------------------------------------

Schedule = float | Sequence[float] | Callable[[int], float]


def _as_schedule(spec: Schedule) -> Callable[[int], float]:
    if callable(spec):
        return spec
    if isinstance(spec, (int, float)):
        return lambda t, v=float(spec): v
    vals = [float(v) for v in spec]
    if not vals:
        raise ValueError("empty schedule")
    return lambda t: vals[min(t, len(vals) - 1)]


def tanh_schedule(a: float, t_mid: float, width: float) -> Callable[[int], float]:
    """alpha_t = a * tanh((t - t_mid) / width); crosses zero at t_mid."""
    return lambda t: a * math.tanh((t - t_mid) / width)


@dataclass(frozen=True)
class ToyParams:
    """Inputs of the toy iteration; alpha and beta may be constants,
    per-step sequences (last value held), or callables of t."""

    alpha: Schedule
    beta: Schedule
    r0: float

    def alpha_at(self, t: int) -> float:
        a = _as_schedule(self.alpha)(t)
        if abs(a) > 1.0:
            raise ValueError(f"|alpha_t| <= 1 required, got {a} at t={t}")
        return a

    def beta_at(self, t: int) -> float:
        return _as_schedule(self.beta)(t)


def toy_step(r: float, t: int, params: ToyParams) -> float:
    """r_{t+1} = -(1 - alpha_t) * r_t - beta_t * r_t^2."""
    a = params.alpha_at(t)
    b = params.beta_at(t)
    return -(1.0 - a) * r - b * r * r


def toy_oscillation_limits(a: float, beta: float = 1.0) -> tuple[float, float]:
    """Subsequence limits (r_plus, r_minus) of the constant alpha = -a run:
    r_+- = (+-sqrt(a^2 + 4a) - a) / 2, rescaled by 1/beta for beta != 1."""
    root = math.sqrt(a * a + 4.0 * a)
    return (0.5 * (root - a) / beta, 0.5 * (-root - a) / beta)


@dataclass
class ToyTrace:
    r: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray

    def subsequence_limits(self, window_frac: float = 0.1) -> tuple[float, float]:
        """(even, odd) index means over the final window (default last 10%)."""
        n = self.r.shape[0]
        lo = max(0, n - max(2, int(round(window_frac * n))))
        tail_idx = np.arange(lo, n)
        even = self.r[tail_idx[tail_idx % 2 == 0]]
        odd = self.r[tail_idx[tail_idx % 2 == 1]]
        return (float(even.mean()) if even.size else math.nan,
                float(odd.mean()) if odd.size else math.nan)


def toy_run(params: ToyParams, steps: int) -> ToyTrace:
    """Iterate the toy map; the trace includes r_0 through r_steps and the
    schedule values used at each update."""
    if steps < 1:
        raise ValueError("steps must be >= 1")
    r = np.empty(steps + 1)
    al = np.empty(steps)
    be = np.empty(steps)
    r[0] = params.r0
    for t in range(steps):
        al[t] = params.alpha_at(t)
        be[t] = params.beta_at(t)
        r[t + 1] = -(1.0 - al[t]) * r[t] - be[t] * r[t] * r[t]
    return ToyTrace(r=r, alpha=al, beta=be)
