"""Joint zero density of the truncated random polynomial and its functionals.

For the degree-N truncation with scale L, the unordered zeros have a
density proportional to the squared Vandermonde factor divided by the
(N+1)-st power of a weighted norm of the monic polynomial with those
zeros. The weighted norm reduces to a finite sum of radial moments, so
it is exact; the normalization constant is carried in the log domain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize
from scipy.special import logsumexp

from .errors import DomainError, ParameterError
from .special import WeightModel, log_gamma

__all__ = [
    "PolyDensityParams",
    "make_density_params",
    "nu_moment",
    "log_nu_moment",
    "weighted_norm",
    "log_weighted_norm",
    "joint_density",
    "a_functional",
    "s_functional",
    "i_star",
]

_DENSITY_N_CAP = 6


@dataclass(frozen=True)
class PolyDensityParams:
    """Degree, scale, weight model, and the log normalization constant."""

    n_deg: int
    l_scale: float
    model: WeightModel
    log_a_nl: float


def make_density_params(n_deg: int, l_scale: float, model: WeightModel) -> PolyDensityParams:
    """Assemble parameters; the normalization is a pure log-domain sum.

    log A = log N! + sum_k log Gamma(2(k+1)/beta) - N log pi
            - (N+1) log Gamma(2/beta) - N(N+1) log L.
    """
    if n_deg < 1:
        raise ParameterError(f"degree must be >= 1, got {n_deg}")
    if not (l_scale > 0):
        raise ParameterError(f"scale must be positive, got {l_scale}")
    b = model.beta
    n = n_deg
    ks = np.arange(n + 1)
    log_a = (
        math.lgamma(n + 1)
        + float(np.sum(log_gamma(2.0 * (ks + 1.0) / b)))
        - n * math.log(math.pi)
        - (n + 1) * log_gamma(2.0 / b)
        - n * (n + 1) * math.log(l_scale)
    )
    return PolyDensityParams(n_deg=n, l_scale=float(l_scale), model=model, log_a_nl=log_a)


def log_nu_moment(k: int, params: PolyDensityParams) -> float:
    """log of the 2k-th absolute moment of the reference weight."""
    if k < 0:
        raise DomainError("moment order must be nonnegative")
    b = params.model.beta
    return (
        log_gamma(2.0 * (k + 1.0) / b)
        - log_gamma(2.0 / b)
        - 2.0 * k * math.log(params.l_scale)
    )


def nu_moment(k: int, params: PolyDensityParams) -> float:
    """int |w|^{2k} against the reference weight: Gamma(2(k+1)/beta)/(Gamma(2/beta) L^{2k})."""
    return math.exp(log_nu_moment(k, params))


def _monic_coeffs(zbar: np.ndarray, scale: float) -> np.ndarray:
    """Coefficients (ascending, length N+1) of prod (v - z_j/scale)."""
    c = np.array([1.0 + 0.0j])
    for z in zbar:
        c = np.convolve(c, np.array([-z / scale, 1.0]))
    return c  # ascending powers of v


def log_weighted_norm(zbar, params: PolyDensityParams) -> float:
    """log of int prod_j |w - z_j|^2 against the reference weight.

    Expands the monic polynomial and pairs |coefficient|^2 with the
    radial moments; cross terms vanish by rotation invariance. Roots are
    rescaled by max(1, max|z_j|) first so the expansion stays inside
    double range, with the scale restored in the log domain.
    """
    zb = np.asarray(zbar, dtype=complex)
    n = params.n_deg
    if len(zb) != n:
        raise ParameterError(f"expected {n} zeros, got {len(zb)}")
    scale = max(1.0, float(np.max(np.abs(zb)))) if len(zb) else 1.0
    c = _monic_coeffs(zb, scale)
    ks = np.arange(n + 1)
    log_m = np.array([log_nu_moment(int(k), params) for k in ks])
    mags = np.abs(c)
    with np.errstate(divide="ignore"):
        log_c2 = 2.0 * np.log(mags)
    log_terms = log_c2 + 2.0 * (n - ks) * math.log(scale) + log_m
    return float(logsumexp(log_terms[np.isfinite(log_terms)]))


def weighted_norm(zbar, params: PolyDensityParams) -> float:
    return math.exp(log_weighted_norm(zbar, params))


def _log_vandermonde2(zbar: np.ndarray) -> float:
    """sum over ordered pairs j != k of log|z_j - z_k|; -inf when coincident."""
    n = len(zbar)
    total = 0.0
    for j in range(n):
        for k in range(j + 1, n):
            d = abs(zbar[j] - zbar[k])
            if d == 0.0:
                return -math.inf
            total += 2.0 * math.log(d)
    return total


def joint_density(zbar, params: PolyDensityParams) -> float:
    """Unordered-zeros density at the configuration zbar (N <= 6).

    exp(log A + sum_{j != k} log|z_j - z_k| - (N+1) log weighted_norm).
    Returns 0 for coincident zeros.
    """
    if params.n_deg > _DENSITY_N_CAP:
        raise ParameterError(f"density evaluation capped at N = {_DENSITY_N_CAP}")
    zb = np.asarray(zbar, dtype=complex)
    lv = _log_vandermonde2(zb)
    if lv == -math.inf:
        return 0.0
    ls = log_weighted_norm(zb, params)
    return math.exp(params.log_a_nl + lv - (params.n_deg + 1) * ls)


def a_functional(zbar, params: PolyDensityParams) -> float:
    """log of the weighted sup: max_w (2 sum log|w - z_j| - L^beta |w|^beta).

    Coarse radial-angular scan (512 radii by 256 angles) over a disk
    sized from the per-root balance radius, then a local simplex polish.
    If the scan peaks on the boundary the domain is doubled.
    """
    zb = np.asarray(zbar, dtype=complex)
    n = params.n_deg
    if len(zb) != n:
        raise ParameterError(f"expected {n} zeros, got {len(zb)}")
    b = params.model.beta
    lb = params.l_scale**b

    def neg_log_val(xy):
        w = complex(xy[0], xy[1])
        d = np.abs(w - zb)
        if np.any(d == 0.0):
            return math.inf
        return -(2.0 * float(np.sum(np.log(d))) - lb * abs(w) ** b)

    r_balance = (2.0 * n / (b * lb)) ** (1.0 / b)
    r_search = 2.0 * max(r_balance, float(np.max(np.abs(zb))) if len(zb) else 0.0, 1e-3)
    for _ in range(8):
        radii = np.linspace(r_search / 512.0, r_search, 512)
        angles = np.linspace(0.0, 2.0 * math.pi, 256, endpoint=False)
        wgrid = radii[:, None] * np.exp(1j * angles)[None, :]
        dists = np.abs(wgrid[..., None] - zb[None, None, :])
        with np.errstate(divide="ignore"):
            vals = 2.0 * np.sum(np.log(dists), axis=-1) - lb * np.abs(wgrid) ** b
        i_best = np.unravel_index(np.argmax(vals), vals.shape)
        if radii[i_best[0]] < radii[-2]:
            break
        r_search *= 2.0  # max sits on the rim: the search disk was too small
    w_best = wgrid[i_best]
    res = minimize(
        neg_log_val,
        [w_best.real, w_best.imag],
        method="Nelder-Mead",
        options={"xatol": 1e-9, "fatol": 1e-12, "maxiter": 2000},
    )
    return float(-res.fun)


def s_functional(zbar, params: PolyDensityParams) -> float:
    """log of the weighted squared norm of the monic polynomial with zeros zbar."""
    return log_weighted_norm(zbar, params)


def i_star(zbar, params: PolyDensityParams) -> float:
    """(1/N) log A - (1/N^2) sum_{j != k} log|z_j - z_k|; +inf on coincidence."""
    zb = np.asarray(zbar, dtype=complex)
    n = params.n_deg
    lv = _log_vandermonde2(zb)
    if lv == -math.inf:
        return math.inf
    return a_functional(zb, params) / n - lv / (n * n)
