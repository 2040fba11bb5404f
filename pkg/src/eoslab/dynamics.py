"""Coordinate machinery for the d = 2 single-sample model.

Everything here lives in the normalized geometry x = (1, x), y = mu,
prior (mu, 0). The squared weights are expanded over the orthogonal basis
beta_0 = (1, x), beta_1 = (x, -1):

    w_plus^2  = p0*beta_0 + p1*beta_1 + beta_star/2
    w_minus^2 = q0*beta_0 + q1*beta_1 - beta_star/2

and the coefficient vectors p, q are themselves expanded over v1 = beta_0,
v2 = beta_1 (the shared eigenvectors of the coupling matrices A and B) to
give the quadruplet (a, a', b, b'). Three equivalent step maps are provided:

* `pq_step` — the matrix recurrence on (p, q);
* `quadruplet_step` — the four scalar multiplicative updates;
* `reduced_step` — the 2-D map (g, h) on (r, s) obtained by freezing
  a' = b' = 0, with s = eta * c_x * b.

The residual identity r = (1 + x^2) * ((a - a') + x*(b - b')) - mu ties them
together; equivalence is exact algebra, so the implementations must agree to
floating-point accumulation error (tested at 1e-8 over 10^3 steps).

Under the scaling initialization w_plus = w_minus = alpha * 1 the projected
quadruplet is a = a' = b = b' = alpha^2 / (1 + x^2), hence r_0 = -mu. The
initial quadruplet is always computed by projection, never hardcoded.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .fixed_points import MapParams
from .model import Dataset, TrajectoryLog, WeightState


@dataclass(frozen=True)
class BasisContext:
    """Normalized d = 2 problem (x, mu, eta) with derived basis objects."""

    x: float
    mu: float
    eta: float

    def __post_init__(self):
        if self.eta <= 0:
            raise ValueError("eta must be positive")
        if not 0.0 < self.x < 1.0:
            warnings.warn(
                f"x = {self.x} is outside (0, 1); the reduced-map analysis "
                "assumes 0 < x < 1, the simulation remains meaningful",
                stacklevel=2,
            )

    # -- derived geometry ---------------------------------------------------
    @property
    def nx(self) -> float:
        return 1.0 + self.x**2

    @property
    def beta0(self) -> np.ndarray:
        return np.array([1.0, self.x])

    @property
    def beta1(self) -> np.ndarray:
        return np.array([self.x, -1.0])

    @property
    def v1(self) -> np.ndarray:
        return self.beta0

    @property
    def v2(self) -> np.ndarray:
        return self.beta1

    @property
    def beta_star(self) -> np.ndarray:
        return np.array([self.mu, 0.0])

    @property
    def c_x(self) -> float:
        return self.x * (1.0 - self.x) * self.nx

    @property
    def c_x_prime(self) -> float:
        return self.x * (1.0 - self.x**2) * self.nx

    @property
    def A(self) -> np.ndarray:
        x = self.x
        return np.array([[1.0 + x**3, x * (1.0 - x)],
                         [x * (1.0 - x), x * (1.0 + x)]]) / self.nx

    @property
    def B(self) -> np.ndarray:
        x = self.x
        return np.array([[1.0 + x**4, x * (1.0 - x**2)],
                         [x * (1.0 - x**2), 2.0 * x**2]]) / self.nx

    @property
    def mu_eta(self) -> float:
        return self.mu * self.eta

    @property
    def map_params(self) -> MapParams:
        return MapParams(self.mu, self.eta, self.x)

    def dataset(self) -> Dataset:
        return Dataset.canonical_2d(self.x, self.mu)

    @classmethod
    def from_dataset(cls, data: Dataset, eta: float) -> "BasisContext":
        """Context for a dataset already in the normalized form (1, x)."""
        if data.n != 1 or data.d != 2:
            raise ValueError("context requires a single d = 2 sample")
        x = data.xs[0]
        if x[0] != 1.0:
            raise ValueError("expected the first data coordinate fixed to 1")
        return cls(float(x[1]), float(data.ys[0]), eta)


@dataclass(frozen=True)
class PQState:
    p: np.ndarray
    q: np.ndarray


@dataclass(frozen=True)
class Quadruplet:
    a: float
    a_prime: float
    b: float
    b_prime: float

    def as_array(self) -> np.ndarray:
        return np.array([self.a, self.a_prime, self.b, self.b_prime])


@dataclass(frozen=True)
class ReducedState:
    """Detached (r, s) state of the reduced map, with the compact-update
    diagnostics alpha, beta (gamma vanishes once a' = b' = 0)."""

    r: float
    s: float

    def alpha_diag(self, ctx: BasisContext) -> float:
        return 2.0 - 2.0 * ctx.mu_eta + 2.0 * self.s

    def beta_diag(self, ctx: BasisContext) -> float:
        # b = s / (eta c_x), so c'_x * b = (1 + x) * s / eta
        return (2.0 * ctx.eta - ctx.eta**2 * (ctx.mu + self.r)
                + ctx.eta * (1.0 + ctx.x) * self.s)


# ---------------------------------------------------------------------------
# projections
# ---------------------------------------------------------------------------

def project_pq(w: WeightState, ctx: BasisContext) -> PQState:
    """Orthogonal projection of (w_plus^2 -+ beta_star/2) onto {beta_0, beta_1}."""
    if w.d != 2:
        raise ValueError("projection requires d = 2")
    b0, b1, nx = ctx.beta0, ctx.beta1, ctx.nx
    tp = w.w_plus**2 - ctx.beta_star / 2.0
    tq = w.w_minus**2 + ctx.beta_star / 2.0
    p = np.array([tp @ b0, tp @ b1]) / nx
    q = np.array([tq @ b0, tq @ b1]) / nx
    return PQState(p, q)


def pq_to_quadruplet(pq: PQState, ctx: BasisContext) -> Quadruplet:
    nx = ctx.nx
    shift = ctx.mu / (2.0 * nx)
    a = float(pq.p @ ctx.beta0) / nx + shift
    b = float(pq.p @ ctx.beta1) / nx
    a_prime = float(pq.q @ ctx.beta0) / nx - shift
    b_prime = float(pq.q @ ctx.beta1) / nx
    return Quadruplet(a, a_prime, b, b_prime)


def project_to_quadruplet(w: WeightState, ctx: BasisContext) -> Quadruplet:
    """Unique quadruplet coefficients of a weight state; round-trips through
    `quadruplet_to_squares` to 1e-12."""
    return pq_to_quadruplet(project_pq(w, ctx), ctx)


def quadruplet_to_pq(quad: Quadruplet, ctx: BasisContext) -> PQState:
    shift = ctx.mu / (2.0 * ctx.nx)
    p = (quad.a - shift) * ctx.beta0 + quad.b * ctx.beta1
    q = (quad.a_prime + shift) * ctx.beta0 + quad.b_prime * ctx.beta1
    return PQState(p, q)


def pq_to_squares(pq: PQState, ctx: BasisContext) -> tuple[np.ndarray, np.ndarray]:
    """Reconstruct (w_plus^2, w_minus^2) from projection coefficients."""
    wp2 = pq.p[0] * ctx.beta0 + pq.p[1] * ctx.beta1 + ctx.beta_star / 2.0
    wm2 = pq.q[0] * ctx.beta0 + pq.q[1] * ctx.beta1 - ctx.beta_star / 2.0
    return wp2, wm2


def quadruplet_to_squares(quad: Quadruplet, ctx: BasisContext) -> tuple[np.ndarray, np.ndarray]:
    return pq_to_squares(quadruplet_to_pq(quad, ctx), ctx)


# ---------------------------------------------------------------------------
# residual identities
# ---------------------------------------------------------------------------

def pq_residual(pq: PQState, ctx: BasisContext) -> float:
    return float(ctx.nx * (pq.p[0] - pq.q[0]))


def quadruplet_residual(quad: Quadruplet, ctx: BasisContext) -> float:
    return float(ctx.nx * ((quad.a - quad.a_prime)
                           + ctx.x * (quad.b - quad.b_prime)) - ctx.mu)


# ---------------------------------------------------------------------------
# step maps
# ---------------------------------------------------------------------------

def pq_step(state: PQState, ctx: BasisContext) -> PQState:
    """Matrix recurrence on (p, q); the forcing term is proportional to
    mu * beta_0 / (2 * (1 + x^2))."""
    r = pq_residual(state, ctx)
    eta = ctx.eta
    eye = np.eye(2)
    force = ctx.mu * ctx.beta0 / (2.0 * ctx.nx)
    m_minus = eye - 2.0 * eta * r * ctx.A + eta**2 * r**2 * ctx.B
    m_plus = eye + 2.0 * eta * r * ctx.A + eta**2 * r**2 * ctx.B
    p = m_minus @ state.p - (2.0 * eta * r - eta**2 * r**2) * force
    q = m_plus @ state.q - (2.0 * eta * r + eta**2 * r**2) * force
    return PQState(p, q)


def quadruplet_step(quad: Quadruplet, ctx: BasisContext) -> Quadruplet:
    """a <- (1 - eta r)^2 a,  a' <- (1 + eta r)^2 a',
    b <- (1 - x eta r)^2 b,  b' <- (1 + x eta r)^2 b'."""
    r = quadruplet_residual(quad, ctx)
    er = ctx.eta * r
    xer = ctx.x * er
    return Quadruplet(
        (1.0 - er) ** 2 * quad.a,
        (1.0 + er) ** 2 * quad.a_prime,
        (1.0 - xer) ** 2 * quad.b,
        (1.0 + xer) ** 2 * quad.b_prime,
    )


def r_update_full(quad: Quadruplet, ctx: BasisContext) -> float:
    """Next residual from the closed-form update (all four coefficients live);
    equals the residual identity applied to `quadruplet_step` to 1e-12."""
    r = quadruplet_residual(quad, ctx)
    eta, nx = ctx.eta, ctx.nx
    db = quad.b - quad.b_prime
    return float(
        (1.0 - 2.0 * eta * (ctx.mu + r - ctx.c_x * db)) * r
        + eta**2 * r**2 * (ctx.mu + r - ctx.c_x_prime * db)
        - nx * 4.0 * eta * r * (quad.a_prime + ctx.x**2 * quad.b_prime)
    )


def compact_coefficients(quad: Quadruplet, ctx: BasisContext) -> tuple[float, float, float]:
    """(alpha_t, beta_t, gamma_t) of the compact residual update
    r_{t+1} = -(1 - alpha + gamma) r - beta r^2."""
    r = quadruplet_residual(quad, ctx)
    db = quad.b - quad.b_prime
    alpha = 2.0 - 2.0 * ctx.eta * (ctx.mu - ctx.c_x * db)
    beta = 2.0 * ctx.eta - ctx.eta**2 * (ctx.mu + r - ctx.c_x_prime * db)
    gamma = ctx.nx * 4.0 * ctx.eta * (quad.a_prime + ctx.x**2 * quad.b_prime)
    return alpha, beta, gamma


def reduced_from_quadruplet(quad: Quadruplet, ctx: BasisContext) -> ReducedState:
    """Attached reduction: r from the residual identity, s = eta * c_x * b."""
    return ReducedState(quadruplet_residual(quad, ctx), ctx.eta * ctx.c_x * quad.b)


def reduced_step(state: ReducedState, ctx: BasisContext) -> ReducedState:
    """(r, s) <- (g(r, s), h(r, s)); the detached 2-D system."""
    params = ctx.map_params
    return ReducedState(params.g(state.r, state.s), params.h(state.r, state.s))


# ---------------------------------------------------------------------------
# trajectory helpers
# ---------------------------------------------------------------------------

def run_quadruplet(quad0: Quadruplet, ctx: BasisContext, steps: int) -> np.ndarray:
    """Iterate the quadruplet map; returns an array of shape (steps+1, 5) with
    columns (a, a', b, b', r)."""
    out = np.empty((steps + 1, 5))
    q = quad0
    for t in range(steps + 1):
        out[t, :4] = q.as_array()
        out[t, 4] = quadruplet_residual(q, ctx)
        if t < steps:
            q = quadruplet_step(q, ctx)
    return out


def run_pq(pq0: PQState, ctx: BasisContext, steps: int) -> np.ndarray:
    """Iterate the (p, q) recurrence; returns residuals of shape (steps+1,)."""
    out = np.empty(steps + 1)
    st = pq0
    for t in range(steps + 1):
        out[t] = pq_residual(st, ctx)
        if t < steps:
            st = pq_step(st, ctx)
    return out


def run_reduced(state0: ReducedState, ctx: BasisContext, steps: int) -> np.ndarray:
    """Iterate the detached reduced map; returns shape (steps+1, 2) of (r, s)."""
    out = np.empty((steps + 1, 2))
    st = state0
    for t in range(steps + 1):
        out[t] = (st.r, st.s)
        if t < steps:
            st = reduced_step(st, ctx)
    return out


@dataclass
class QuadrupletTrace:
    """Per-step quadruplet diagnostics attached to a weight-space trajectory."""

    t: np.ndarray
    a: np.ndarray
    a_prime: np.ndarray
    b: np.ndarray
    b_prime: np.ndarray
    r_identity: np.ndarray
    s: np.ndarray
    alpha_diag: np.ndarray
    beta_diag: np.ndarray
    gamma_diag: np.ndarray


def attach_quadruplet(traj: TrajectoryLog, ctx: BasisContext) -> QuadrupletTrace:
    """Project every recorded weight snapshot onto the quadruplet coordinates.

    Vectorized over snapshots; marker detection wants stride 1, which is the
    default for d = 2 runs.
    """
    ts = np.array([t for t, _ in traj.weights])
    wp2 = np.array([w.w_plus**2 for _, w in traj.weights])
    wm2 = np.array([w.w_minus**2 for _, w in traj.weights])
    b0, b1, nx = ctx.beta0, ctx.beta1, ctx.nx
    bstar = ctx.beta_star
    p = np.stack([(wp2 - bstar / 2.0) @ b0, (wp2 - bstar / 2.0) @ b1], axis=1) / nx
    q = np.stack([(wm2 + bstar / 2.0) @ b0, (wm2 + bstar / 2.0) @ b1], axis=1) / nx
    shift = ctx.mu / (2.0 * nx)
    a = (p @ b0) / nx + shift
    b = (p @ b1) / nx
    a_prime = (q @ b0) / nx - shift
    b_prime = (q @ b1) / nx
    r = nx * ((a - a_prime) + ctx.x * (b - b_prime)) - ctx.mu
    s = ctx.eta * ctx.c_x * b
    db = b - b_prime
    alpha = 2.0 - 2.0 * ctx.eta * (ctx.mu - ctx.c_x * db)
    beta = 2.0 * ctx.eta - ctx.eta**2 * (ctx.mu + r - ctx.c_x_prime * db)
    gamma = nx * 4.0 * ctx.eta * (a_prime + ctx.x**2 * b_prime)
    return QuadrupletTrace(ts, a, a_prime, b, b_prime, r, s, alpha, beta, gamma)
