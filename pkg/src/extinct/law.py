"""Closed-form first-extinction law for a resampled discrete distribution.

Each state i with initial mass p_i > 0, resampled with N draws per
iteration, behaves like an independent zero-drift square-root diffusion
whose first passage to zero has CDF exp(-2*N*p_i / tau).  The time at which
the *first* of the M states dies therefore has survival function

    S(tau) = prod_i (1 - exp(-2*N*p_i / tau)),

CDF 1 - S(tau), and mean

    <tau> = integral_0^inf S(tau) dtau
          = 2*N * integral_0^inf prod_i (1 - exp(-x*p_i)) / x^2 dx

after substituting x = 2*N/tau, which makes the N-linearity of the mean
explicit: the x-integral depends only on the shape of p.  The quadrature
splits the x-axis at x* = 1/max(p) and maps the tail onto (0, 1] via
x = x*/t; the mapped tail gets breakpoints at t = p_i/max(p), the scales at
which each state's survival factor turns on.  Everything here is pure and
safe to evaluate concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath as mp
import numpy as np
from scipy import integrate, optimize

from .dist import Distribution
from .errors import (
    BracketFailure,
    NonPositiveEntry,
    NonPositiveTau,
    QuadratureFailure,
    TooFewStates,
)

#: default absolute tolerance, in time units, per unit of 2N
_ABS_TOL_PER_2N = 1e-10

#: direct products switch to log space below this factor size
_LOG_SPACE_CUTOFF = 1e-300


@dataclass(frozen=True, eq=False)
class LawParams:
    """Initial distribution plus the per-iteration sample count N.

    Zero entries are tolerated at this level so the simulators can share
    the type; the analytic operations below insist on strict positivity
    and raise NonPositiveEntry otherwise.
    """

    dist: Distribution
    n_samples: int

    def __post_init__(self):
        if self.n_samples < 1:
            raise NonPositiveEntry(f"n_samples must be >= 1, got {self.n_samples}")
        if self.dist.m < 2:
            raise TooFewStates(f"need at least 2 states, got {self.dist.m}")

    def weights(self) -> np.ndarray:
        """Per-state time scales a_i = 2*N*p_i; requires all p_i > 0."""
        p = self.dist.probs
        if np.any(p <= 0.0):
            raise NonPositiveEntry(
                f"zero-probability states at {np.flatnonzero(p <= 0).tolist()}; "
                "the closed-form law requires strictly positive entries")
        return 2.0 * self.n_samples * p


@dataclass(frozen=True)
class QuadOptions:
    """Tolerances for the mean integral.

    abs_tol is in time units; None resolves to 1e-10 * 2N at call time.
    """

    abs_tol: float | None = None
    rel_tol: float = 1e-8
    max_subdivisions: int = 2000

    def __post_init__(self):
        if self.abs_tol is not None and self.abs_tol <= 0:
            raise ValueError("abs_tol must be positive")
        if self.rel_tol <= 0:
            raise ValueError("rel_tol must be positive")


@dataclass(frozen=True)
class MeanEstimate:
    """Quadrature result: value and an absolute error estimate."""

    value: float
    error: float


def _check_tau(tau) -> np.ndarray:
    t = np.asarray(tau, dtype=float)
    if np.any(t <= 0.0) or np.any(np.isnan(t)):
        raise NonPositiveTau(f"tau must be > 0, got {tau!r}")
    return t


def state_extinction_cdf(p0: float, n: int, tau):
    """Probability that a single state of initial mass p0 is dead by tau."""
    if p0 < 0:
        raise NonPositiveEntry(f"p0 must be >= 0, got {p0}")
    t = _check_tau(tau)
    out = np.exp(-2.0 * n * p0 / t)
    return float(out) if np.isscalar(tau) else out


def state_extinction_pdf(p0: float, n: int, tau):
    """Density of a single state's extinction time: (a/tau^2) exp(-a/tau)."""
    if p0 <= 0:
        raise NonPositiveEntry(f"p0 must be > 0, got {p0}")
    t = _check_tau(tau)
    a = 2.0 * n * p0
    out = (a / (t * t)) * np.exp(-a / t)
    return float(out) if np.isscalar(tau) else out


def _survival_factors(a: np.ndarray, t: np.ndarray) -> np.ndarray:
    # 1 - exp(-a/tau) for each state, shape (..., M); expm1 keeps small
    # factors accurate when tau >> a.
    return -np.expm1(-(a / t[..., None]))


def min_survival(params: LawParams, tau):
    """Probability that no state has died by tau: the survival product."""
    a = params.weights()
    t = _check_tau(tau)
    scalar = np.isscalar(tau)
    t = np.atleast_1d(t)
    f = _survival_factors(a, t)
    prod = np.prod(f, axis=-1)
    # rescue underflowed products in log space (all factors are > 0 unless
    # a/tau itself underflowed, in which case 0 is the right answer)
    tiny = prod < _LOG_SPACE_CUTOFF
    if np.any(tiny):
        with np.errstate(divide="ignore"):
            logs = np.where(f > 0.0, np.log(np.where(f > 0.0, f, 1.0)), -np.inf)
        prod = np.where(tiny, np.exp(logs.sum(axis=-1)), prod)
    return float(prod[0]) if scalar else prod


def min_cdf(params: LawParams, tau):
    """CDF of the first-extinction time: 1 - min_survival."""
    return 1.0 - min_survival(params, tau)


def min_pdf(params: LawParams, tau):
    """Density of the first-extinction time.

    Sum over states of that state's extinction density times the survival
    factors of all other states; assembled in log space so large-M products
    cannot underflow halfway through.
    """
    a = params.weights()
    t = _check_tau(tau)
    scalar = np.isscalar(tau)
    t = np.atleast_1d(t)
    x = a / t[..., None]
    f = -np.expm1(-x)
    out = np.zeros(t.shape)
    ok = f.min(axis=-1) > 0.0  # a zero factor forces pdf to underflow to 0
    if np.any(ok):
        xo = x[ok]
        fo = f[ok]
        logf = np.log(fo)
        total = logf.sum(axis=-1, keepdims=True)
        terms = (a / (t[ok, None] ** 2)) * np.exp(-xo + total - logf)
        out[ok] = terms.sum(axis=-1)
    return float(out[0]) if scalar else out


def _tail_integrand(p: np.ndarray, pmax: float):
    # t in (0, 1] maps to x = (1/pmax)/t; integrand value is g(x)*pmax
    def f(t: float) -> float:
        if t <= 0.0:
            return pmax  # g -> 1 as x -> inf
        x = 1.0 / (pmax * t)
        return float(np.prod(-np.expm1(-x * p))) * pmax

    return f


def _head_integrand(p: np.ndarray):
    m = p.size
    limit0 = float(p[0] * p[1]) if m == 2 else 0.0

    def f(x: float) -> float:
        if x < 1e-100:
            return limit0
        g = float(np.prod(-np.expm1(-x * p)))
        return g / (x * x) if g > 0.0 else 0.0

    return f


def _quad(f, lo, hi, epsabs, epsrel, limit, points=None):
    res = integrate.quad(f, lo, hi, epsabs=epsabs, epsrel=epsrel,
                         limit=limit, points=points, full_output=1)
    if len(res) > 3:
        raise QuadratureFailure(str(res[3]))
    return res[0], res[1]


def mean_first_extinction(params: LawParams,
                          opts: QuadOptions | None = None) -> MeanEstimate:
    """Mean first-extinction time by adaptive quadrature, O(M) per evaluation.

    Returns the value together with the quadrature error estimate; callers
    comparing means should compare against the estimates, not assume exact
    values.
    """
    opts = opts or QuadOptions()
    a = params.weights()  # validates positivity
    p = np.sort(params.dist.probs)[::-1].astype(float)
    pmax = float(p[0])
    two_n = 2.0 * params.n_samples
    abs_tol = opts.abs_tol if opts.abs_tol is not None else _ABS_TOL_PER_2N * two_n
    epsabs = 0.5 * abs_tol / two_n  # per segment, in x-integral units

    head, err_head = _quad(_head_integrand(p), 0.0, 1.0 / pmax,
                           epsabs, opts.rel_tol, opts.max_subdivisions)
    pts = np.unique(p / pmax)
    pts = pts[(pts > 0.0) & (pts < 1.0)]
    tail, err_tail = _quad(_tail_integrand(p, pmax), 0.0, 1.0,
                           epsabs, opts.rel_tol, opts.max_subdivisions,
                           points=pts.tolist() if pts.size else None)
    return MeanEstimate(two_n * (head + tail), two_n * (err_head + err_tail))


def quantile(params: LawParams, q: float) -> float:
    """Invert the first-extinction CDF: tau with min_cdf(tau) = q."""
    if not (0.0 < q < 1.0):
        raise NonPositiveTau(f"quantile level must be in (0, 1), got {q}")
    a = params.weights()
    lo = hi = float(a.min() / math.log(2.0))  # median scale of weakest state

    for _ in range(2100):
        if min_cdf(params, lo) <= q:
            break
        lo /= 2.0
        if lo < 1e-300:
            raise BracketFailure(f"no lower bracket for q={q}")
    for _ in range(2100):
        if min_cdf(params, hi) >= q:
            break
        hi *= 2.0
        if hi > 1e300:
            raise BracketFailure(f"no upper bracket for q={q}")

    if lo == hi:
        return lo
    return float(optimize.brentq(lambda t: min_cdf(params, t) - q, lo, hi,
                                 rtol=1e-12, maxiter=200))


def flat_mean_closed_form(m: int, n: float) -> float:
    """Analytic mean for the flat distribution over m states.

    (2N/m) * sum_{k=2}^{m} (-1)^k C(m,k) k ln k.  The alternating terms grow
    like C(m, m/2) while the sum stays O(1), so binary64 loses ~m*log10(2)
    digits to cancellation; the sum is taken in fixed high-precision
    arithmetic (exact integer binomials) and rounded once at the end.
    """
    if m < 2:
        raise TooFewStates(f"need at least 2 states, got {m}")
    digits = 30 + int(0.31 * m)
    with mp.workdps(digits):
        total = mp.mpf(0)
        for k in range(2, m + 1):
            term = mp.mpf(math.comb(m, k) * k) * mp.log(k)
            total = total + term if k % 2 == 0 else total - term
        return float(2.0 * mp.mpf(n) / m * total)
