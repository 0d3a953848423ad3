"""Gamma-function machinery, coefficient sizing, and truncation plans.

Everything downstream (sampling, zero counting, densities, energies)
parameterizes through the two small records defined here: WeightModel
fixes the weight exponent beta and its derived constants, and
TruncationPlan fixes how a random series gets cut to a polynomial on a
disk of radius r. All gamma arithmetic is done in the log domain; the
raw Gamma function overflows doubles long before the regimes of
interest.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .errors import DomainError, ParameterError

__all__ = [
    "WeightModel",
    "TruncationPlan",
    "log_gamma",
    "coefficient",
    "log_coefficient",
    "stirling_bounds",
    "stirling_threshold",
    "make_truncation_plan",
]


@dataclass(frozen=True)
class WeightModel:
    """Weight exponent beta plus constants derived from it.

    c_beta is the prefactor 2^(2/beta) * beta^(1/2 - 2/beta) appearing in
    the two-sided Stirling bracket for Gamma(2(k+1)/beta). hole_inner and
    hole_outer delimit the scaled annulus 1 < |z| < e^(1/beta) that the
    conditional zero distribution avoids.
    """

    beta: float
    c_beta: float = field(init=False)
    hole_inner: float = field(init=False, default=1.0)
    hole_outer: float = field(init=False)

    def __post_init__(self):
        if not (self.beta > 0) or not math.isfinite(self.beta):
            raise DomainError(f"beta must be a positive real, got {self.beta}")
        b = float(self.beta)
        object.__setattr__(self, "beta", b)
        object.__setattr__(
            self, "c_beta", 2.0 ** (2.0 / b) * b ** (0.5 - 2.0 / b)
        )
        object.__setattr__(self, "hole_inner", 1.0)
        object.__setattr__(self, "hole_outer", math.exp(1.0 / b))


@dataclass(frozen=True)
class TruncationPlan:
    """Desk-scale recipe for replacing the series by a degree-N polynomial.

    r is the disk radius the truncation is meant to cover, alpha the
    dimensionless scale (canonically between log r and 2 log r), and
    n_trunc = round(beta*alpha*r^beta/2) the polynomial degree. The
    remaining fields are the contour-transfer constants: gamma = t = r^(-s),
    m0 = B^(2*beta) r^(2*beta), k0_shift = 2*m0*gamma, and the rescaling
    l_scale = (r - k0_shift)/(1 + t).
    """

    r: float
    alpha: float
    n_trunc: int
    s: float
    gamma: float
    t: float
    big_b: float
    m0: float
    k0_shift: float
    l_scale: float
    alpha_in_range: bool = True


def log_gamma(x):
    """Natural log of Gamma(x) for positive real x, scalar or array."""
    if np.isscalar(x):
        if not (x > 0) or not math.isfinite(x):
            raise DomainError(f"log_gamma requires x > 0, got {x}")
        return math.lgamma(x)
    arr = np.asarray(x, dtype=float)
    if arr.size and (not np.all(arr > 0) or not np.all(np.isfinite(arr))):
        raise DomainError("log_gamma requires all arguments > 0 and finite")
    return gammaln(arr)


def log_coefficient(n, model: WeightModel):
    """log of a_n = 1/sqrt(Gamma(2(n+1)/beta)); safe for any n."""
    n_arr = np.asarray(n)
    if np.any(n_arr < 0):
        raise DomainError("coefficient index must be nonnegative")
    return -0.5 * log_gamma(2.0 * (n_arr + 1.0) / model.beta)


def coefficient(n, model: WeightModel):
    """Series coefficient a_n = 1/sqrt(Gamma(2(n+1)/beta)).

    Underflows to 0.0 for large n; use log_coefficient when that matters.
    """
    return np.exp(log_coefficient(n, model))


def stirling_bounds(k, model: WeightModel):
    """Two-sided log-domain bracket for log Gamma(2(k+1)/beta).

    Returns (lower, upper) with upper = lower + log 2, where lower is
    log of c_beta * k^(2/beta - 1/2) * (2k/(beta*e))^(2k/beta). The
    bracket holds for all k at or beyond an empirical threshold; see
    stirling_threshold.
    """
    k_arr = np.asarray(k, dtype=float)
    if np.any(k_arr < 1):
        raise DomainError("stirling_bounds requires k >= 1")
    b = model.beta
    lower = (
        math.log(model.c_beta)
        + (2.0 / b - 0.5) * np.log(k_arr)
        + (2.0 * k_arr / b) * (np.log(2.0 * k_arr / b) - 1.0)
    )
    upper = lower + math.log(2.0)
    if np.isscalar(k):
        return float(lower), float(upper)
    return lower, upper


_threshold_cache: dict[float, int] = {}


def stirling_threshold(model: WeightModel, k_max: int = 100_000) -> int:
    """Smallest k0 such that the Stirling bracket holds for every k in [k0, k_max].

    Discovered empirically per beta and cached. For the betas used in
    practice (0.5 through 4) the threshold is at most 13.
    """
    key = (model.beta, k_max)
    if key in _threshold_cache:
        return _threshold_cache[key]
    k = np.arange(1, k_max + 1, dtype=float)
    lg = gammaln(2.0 * (k + 1.0) / model.beta)
    lower, upper = stirling_bounds(k, model)
    ok = (lower <= lg) & (lg <= upper)
    bad = np.where(~ok)[0]
    thr = 1 if bad.size == 0 else int(k[bad[-1]] + 1)
    if thr > k_max:
        raise ParameterError(
            f"Stirling bracket never stabilizes below k_max={k_max} for beta={model.beta}"
        )
    _threshold_cache[key] = thr
    return thr


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def make_truncation_plan(
    r: float,
    model: WeightModel,
    alpha: float | None = None,
    big_b: float = 1.0,
    s: float | None = None,
) -> TruncationPlan:
    """Build a TruncationPlan for a disk of radius r.

    alpha defaults to 1.5*log(r), the midpoint of the canonical range
    [log r, 2 log r]; values outside that range are allowed but flagged
    on the plan (alpha_in_range=False) since some tail estimates assume
    it. s must exceed 1 + 4*beta; when omitted it is chosen just large
    enough that k0_shift = 2*m0*r^(-s) stays below r/2.
    """
    beta = model.beta
    if not (r > 1.0):
        raise ParameterError(f"plan radius must exceed 1, got {r}")
    if not (big_b >= 1.0):
        raise ParameterError(f"big_b must be >= 1, got {big_b}")
    if alpha is None:
        alpha = 1.5 * math.log(r)
    if not (alpha > 0):
        raise ParameterError(f"alpha must be positive, got {alpha}")
    if s is None:
        # keep k0_shift = 2 B^{2b} r^{2b - s} below r/2:
        # s >= 2*beta - 1 + log(4 B^{2 beta}) / log(r)
        s_geom = 2.0 * beta - 1.0 + math.log(4.0 * big_b ** (2.0 * beta)) / math.log(r)
        s = max(1.0 + 4.0 * beta, s_geom) + 0.5
    if not (s > 1.0 + 4.0 * beta):
        raise ParameterError(
            f"s must exceed 1 + 4*beta = {1.0 + 4.0 * beta}, got {s}"
        )
    n_trunc = max(1, _round_half_up(0.5 * beta * alpha * r**beta))
    gamma = r ** (-s)
    t = gamma
    m0 = big_b ** (2.0 * beta) * r ** (2.0 * beta)
    k0_shift = 2.0 * m0 * gamma
    l_scale = (r - k0_shift) / (1.0 + t)
    if not (0.0 < l_scale < r):
        raise ParameterError(
            f"degenerate plan: k0_shift={k0_shift:.3g} >= r={r}; increase s"
        )
    lo, hi = math.log(r), 2.0 * math.log(r)
    alpha_in_range = (lo <= alpha <= hi)
    return TruncationPlan(
        r=float(r),
        alpha=float(alpha),
        n_trunc=n_trunc,
        s=float(s),
        gamma=gamma,
        t=t,
        big_b=float(big_b),
        m0=m0,
        k0_shift=k0_shift,
        l_scale=l_scale,
        alpha_in_range=alpha_in_range,
    )
