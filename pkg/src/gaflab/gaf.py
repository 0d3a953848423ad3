"""Sampling and evaluation of the random series and its truncations.

The random function is sum_k xi_k a_k z^k with a_k = 1/sqrt(Gamma(2(k+1)/beta))
and xi_k i.i.d. standard complex Gaussians (E|xi|^2 = 1). A TruncationPlan
cuts the series at degree n_trunc; everything here works with that
polynomial. Coefficients are stored rescaled by a reference radius so
Horner evaluation stays inside double range out to several plan radii.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .errors import DomainError, ParameterError
from .special import TruncationPlan, WeightModel, log_coefficient

__all__ = [
    "GafSample",
    "sample_gaf",
    "evaluate_truncated",
    "evaluate_range",
    "tail_bound",
    "kernel_diag",
    "log_kernel_diag",
    "first_intensity",
    "expected_count",
]

_SQRT_HALF = math.sqrt(0.5)


@dataclass(frozen=True)
class GafSample:
    """One realization's complex Gaussian coefficients xi_0..xi_N."""

    model: WeightModel
    plan: TruncationPlan
    xi: np.ndarray
    seed: int
    stream_id: int


def _rng_for(seed: int, stream_id: int) -> np.random.Generator:
    # counter-based generator keyed on (seed, stream): same key, same bytes,
    # regardless of how many other streams were drawn elsewhere
    key = np.array([seed % 2**64, stream_id % 2**64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def standard_complex_gaussians(n: int, seed: int, stream_id: int) -> np.ndarray:
    """n i.i.d. complex Gaussians with E|xi|^2 = 1, deterministic per key."""
    rng = _rng_for(seed, stream_id)
    draws = rng.standard_normal(2 * n)
    return (draws[0::2] + 1j * draws[1::2]) * _SQRT_HALF


def sample_gaf(model: WeightModel, plan: TruncationPlan, seed: int, stream_id: int) -> GafSample:
    """Draw the n_trunc+1 coefficients for one truncated sample."""
    xi = standard_complex_gaussians(plan.n_trunc + 1, seed, stream_id)
    return GafSample(model=model, plan=plan, xi=xi, seed=seed, stream_id=stream_id)


def _scaled_coeffs(xi: np.ndarray, model: WeightModel, rho0: float, k_lo: int = 0) -> np.ndarray:
    k = np.arange(k_lo, k_lo + len(xi))
    log_a = log_coefficient(k, model)
    return xi * np.exp(log_a + k * math.log(rho0))


def _horner(coeffs: np.ndarray, u: np.ndarray) -> np.ndarray:
    acc = np.zeros_like(u, dtype=complex)
    for c in coeffs[::-1]:
        acc = acc * u + c
    return acc


def evaluate_truncated(sample: GafSample, z):
    """Evaluate the truncated series at z (scalar or array).

    Validated for |z| <= 4 * big_b * r. Coefficients are rescaled by the
    reference radius rho0 = plan.r and the polynomial is evaluated by
    Horner in u = z / rho0.
    """
    z_arr = np.asarray(z, dtype=complex)
    if not np.all(np.isfinite(z_arr)):
        raise DomainError("evaluate_truncated requires finite z")
    lim = 4.0 * sample.plan.big_b * sample.plan.r
    if np.any(np.abs(z_arr) > lim * (1.0 + 1e-12)):
        raise DomainError(f"|z| exceeds validated range {lim:.3g}")
    rho0 = sample.plan.r
    coeffs = _scaled_coeffs(sample.xi, sample.model, rho0)
    out = _horner(coeffs, z_arr / rho0)
    if np.isscalar(z) or z_arr.ndim == 0:
        return complex(out)
    return out


def evaluate_range(xi_slice: np.ndarray, model: WeightModel, z, k_lo: int, rho0: float | None = None):
    """Evaluate sum_{k=k_lo}^{k_lo+len-1} xi_k a_k z^k stably.

    Used for tail segments. rho0 defaults to max(|z|) so |u| <= 1 and the
    leading monomial factor u^k_lo cannot overflow.
    """
    z_arr = np.asarray(z, dtype=complex)
    if rho0 is None:
        rho0 = float(np.max(np.abs(z_arr)))
        if rho0 == 0.0:
            rho0 = 1.0
    coeffs = _scaled_coeffs(xi_slice, model, rho0, k_lo=k_lo)
    u = z_arr / rho0
    out = _horner(coeffs, u) * u**k_lo
    if np.isscalar(z) or z_arr.ndim == 0:
        return complex(out)
    return out


def tail_bound(plan: TruncationPlan, model: WeightModel) -> float:
    """Log of the deterministic sup bound on the discarded tail over |z| <= B*r.

    Requires alpha >= (4*big_b)^beta; under that hypothesis the tail
    sum_{k>N} |xi_k| a_k |z|^k is bounded by exp of the returned value
    outside an event of negligible probability. Returned in the log
    domain because the bound underflows doubles at moderate radii.
    """
    b = model.beta
    floor_alpha = (4.0 * plan.big_b) ** b
    if plan.alpha < floor_alpha * (1.0 - 1e-12):
        raise ParameterError(
            "tail bound hypothesis needs alpha >= (4*big_b)^beta = "
            f"{floor_alpha:.6g}, got alpha = {plan.alpha:.6g}"
        )
    return (plan.n_trunc / b) * math.log(4.0 * plan.big_b**b / plan.alpha)


def log_kernel_diag(model: WeightModel, n_trunc: int, x: float) -> float:
    """log of K(x) = sum_{k<=N} x^{2k} / Gamma(2(k+1)/beta) at radius x >= 0."""
    if x < 0:
        raise DomainError("radius must be nonnegative")
    k = np.arange(n_trunc + 1)
    log_terms = 2.0 * log_coefficient(k, model)
    if x > 0:
        log_terms = log_terms + 2.0 * k * math.log(x)
    else:
        log_terms = log_terms[:1]
    return float(logsumexp(log_terms))


def kernel_diag(model: WeightModel, n_trunc: int, x: float) -> float:
    """Covariance K(z,z) along the radius; overflows for very large x."""
    return math.exp(log_kernel_diag(model, n_trunc, x))


def first_intensity(model: WeightModel, n_trunc: int, x: float) -> float:
    """Expected zero density at radius x: (1/4pi) * Laplacian of log K.

    Radial Laplacian f'' + f'/x evaluated by central differences with
    step h = max(1e-4, 1e-4 x); at x = 0 the symmetric limit 2 f''(0)
    is used instead.
    """
    if x < 0:
        raise DomainError("radius must be nonnegative")
    h = max(1e-4, 1e-4 * x)

    def phi(t):
        return log_kernel_diag(model, n_trunc, abs(t))

    if x < h:
        # f'(0) = 0 and f'(x)/x -> f''(0), so Laplacian at 0 is 2 f''(0)
        d2 = (phi(h) - 2.0 * phi(0.0) + phi(-h)) / h**2
        return 2.0 * d2 / (4.0 * math.pi)
    d1 = (phi(x + h) - phi(x - h)) / (2.0 * h)
    d2 = (phi(x + h) - 2.0 * phi(x) + phi(x - h)) / h**2
    return (d2 + d1 / x) / (4.0 * math.pi)


def expected_count(model: WeightModel, n_trunc: int, r: float) -> float:
    """Mean zero count of the truncated sample in D(0, r).

    Divergence-theorem reduction of the intensity integral: the disk
    integral of (1/4pi) Laplacian(log K) equals (r/2) d/dr log K(r).
    """
    if r <= 0:
        return 0.0
    h = max(1e-5, 1e-6 * r)
    d1 = (log_kernel_diag(model, n_trunc, r + h) - log_kernel_diag(model, n_trunc, r - h)) / (2.0 * h)
    return 0.5 * r * d1
