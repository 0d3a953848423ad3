"""Zero extraction, contour counting, and linear statistics of zero sets."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import simpson

from .errors import (
    ContourError,
    CoverageError,
    DegenerateDegreeError,
    DomainError,
    ParameterError,
)
from .gaf import GafSample, _scaled_coeffs
from .special import WeightModel

__all__ = [
    "ZeroSet",
    "TestFunction",
    "find_zeros",
    "count_zeros_argument",
    "linear_statistic",
    "radial_bump",
    "mollified_annulus",
    "poly_bump",
]

_DEGREE_CAP = 2000
_UNDERFLOW_FLOOR = 1e-300


@dataclass(frozen=True)
class ZeroSet:
    """Zeros of one truncated sample inside a disk, with diagnostics."""

    zeros: np.ndarray
    radius: float
    residual_max: float
    method: str
    n_discarded: int = 0
    effective_degree: int | None = None


def _newton_polish(coeffs: np.ndarray, roots: np.ndarray, iters: int = 8) -> np.ndarray:
    dcoeffs = coeffs[1:] * np.arange(1, len(coeffs))
    u = roots.copy()
    rev = coeffs[::-1].copy()
    drev = dcoeffs[::-1].copy()
    for _ in range(iters):
        p = np.polyval(rev, u)
        dp = np.polyval(drev, u)
        safe = np.abs(dp) > 0
        step = np.zeros_like(u)
        step[safe] = p[safe] / dp[safe]
        # damp huge steps; they mean a nearly multiple root, leave those be
        big = np.abs(step) > 0.5 * (1.0 + np.abs(u))
        step[big] = 0.0
        u = u - step
        if np.max(np.abs(step)) < 1e-13 * (1.0 + np.max(np.abs(u))):
            break
    return u


def find_zeros(sample: GafSample, search_radius: float, trim_degree: bool = False) -> ZeroSet:
    """Zeros of the truncated sample with |z| <= search_radius.

    Roots come from the balanced companion matrix of the rescaled
    polynomial, then a few Newton steps. Zeros on the boundary are kept
    (|z| <= radius * (1 + 1e-12)); exterior roots are counted in
    n_discarded. Trailing coefficients that underflow the scaled
    representation (magnitude < 1e-300) abort with DegenerateDegreeError
    unless trim_degree=True, in which case the degree is reduced
    explicitly and recorded.
    """
    plan = sample.plan
    if search_radius > 2.0 * plan.big_b * plan.r * (1.0 + 1e-12):
        raise ParameterError(
            f"search radius {search_radius:.3g} exceeds validated region "
            f"{2.0 * plan.big_b * plan.r:.3g}"
        )
    if plan.n_trunc > _DEGREE_CAP:
        raise ParameterError(f"degree {plan.n_trunc} above desk-scale cap {_DEGREE_CAP}")
    rho0 = plan.r
    coeffs = _scaled_coeffs(sample.xi, sample.model, rho0)
    degree = len(coeffs) - 1
    while degree > 0 and abs(coeffs[degree]) < _UNDERFLOW_FLOOR:
        degree -= 1
    effective_degree = None
    if degree < len(coeffs) - 1:
        if not trim_degree:
            raise DegenerateDegreeError(
                f"leading scaled coefficients underflow below {_UNDERFLOW_FLOOR:g}: "
                f"degree {len(coeffs) - 1} reduces to {degree}; pass trim_degree=True "
                "to accept the explicit reduction",
                effective_degree=degree,
            )
        effective_degree = degree
        coeffs = coeffs[: degree + 1]
    if degree == 0:
        return ZeroSet(
            zeros=np.empty(0, dtype=complex),
            radius=float(search_radius),
            residual_max=0.0,
            method="companion",
            n_discarded=0,
            effective_degree=effective_degree,
        )
    u_roots = np.roots(coeffs[::-1])
    u_roots = _newton_polish(coeffs, u_roots)
    z_roots = u_roots * rho0
    keep = np.abs(z_roots) <= search_radius * (1.0 + 1e-12)
    retained = z_roots[keep]
    resid = np.abs(np.polyval(coeffs[::-1], u_roots[keep])) if retained.size else np.zeros(0)
    return ZeroSet(
        zeros=retained,
        radius=float(search_radius),
        residual_max=float(resid.max()) if resid.size else 0.0,
        method="companion",
        n_discarded=int(np.count_nonzero(~keep)),
        effective_degree=effective_degree,
    )


def _winding_on_circle(coeffs: np.ndarray, rho0: float, radius: float) -> int | None:
    """Winding number of the scaled polynomial on |z| = radius, or None on a
    suspected near-circle zero."""
    n_pts = max(512, 8 * (len(coeffs) - 1))
    max_pts = 1 << 21
    while True:
        theta = np.linspace(0.0, 2.0 * math.pi, n_pts, endpoint=False)
        u = (radius / rho0) * np.exp(1j * theta)
        vals = np.polyval(coeffs[::-1], u)
        mags = np.abs(vals)
        if mags.min() < 1e-12 * mags.max():
            return None
        ratios = vals[np.r_[1:n_pts, 0]] / vals
        steps = np.angle(ratios)
        if np.max(np.abs(steps)) < 0.5 * math.pi:
            total = steps.sum() / (2.0 * math.pi)
            w = round(total)
            if abs(total - w) < 1e-6:
                return int(w)
        if n_pts >= max_pts:
            return None
        n_pts *= 2


def count_zeros_argument(sample: GafSample, r: float) -> int:
    """Zero count of the truncated sample in D(0, r) by contour winding.

    Tracks the phase of P around |z| = r with adaptive resolution. If a
    zero sits essentially on the contour the radius is nudged by one part
    in 10^6 (three attempts) before giving up with ContourError.
    """
    if not (r > 0) or not math.isfinite(r):
        raise DomainError(f"count radius must be positive, got {r}")
    plan = sample.plan
    rho0 = plan.r
    coeffs = _scaled_coeffs(sample.xi, sample.model, rho0)
    degree = len(coeffs) - 1
    while degree > 0 and abs(coeffs[degree]) < _UNDERFLOW_FLOOR:
        degree -= 1
    coeffs = coeffs[: degree + 1]
    for radius in (r, r * (1.0 + 1e-6), r * (1.0 - 1e-6), r * (1.0 + 2e-6)):
        w = _winding_on_circle(coeffs, rho0, radius)
        if w is not None:
            return w
    raise ContourError(f"zero persistently near the contour |z| = {r:.6g}")


@dataclass(frozen=True)
class TestFunction:
    """Compactly supported test function with its smoothness metadata.

    values acts on arrays of complex numbers and returns floats; it
    vanishes outside |z| <= support_radius. dirichlet_energy is the
    integral of |grad phi|^2 over the plane; modulus_of_continuity
    dominates sup |phi(x) - phi(y)| over pairs |x - y| <= t.
    """

    name: str
    support_radius: float
    values: Callable[[np.ndarray], np.ndarray]
    dirichlet_energy: float
    modulus_of_continuity: Callable[[float], float]


def _radial_metadata(profile: Callable[[np.ndarray], np.ndarray], big_b: float):
    """Dirichlet energy and a Lipschitz modulus for a radial profile on [0, B]."""
    ts = np.linspace(0.0, big_b, 4001)
    h = ts[1] - ts[0]
    vals = profile(ts)
    dvals = np.gradient(vals, h)
    energy = float(simpson(2.0 * math.pi * ts * dvals**2, x=ts))
    lip = float(np.max(np.abs(dvals)))
    osc = float(vals.max() - vals.min())

    def omega(t: float) -> float:
        return min(lip * t, osc) if t >= 0 else 0.0

    return energy, omega


def _bump_profile(t: np.ndarray) -> np.ndarray:
    """C-infinity bump on [0,1): exp(1 - 1/(1-t^2)), zero beyond 1."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    inside = np.abs(t) < 1.0
    ti = t[inside]
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - ti**2))
    return out


def radial_bump(big_b: float = 1.0) -> TestFunction:
    """Smooth radial bump supported on |z| <= B, peak value 1 at the origin."""

    def profile(t):
        return _bump_profile(np.asarray(t, dtype=float) / big_b)

    energy, omega = _radial_metadata(profile, big_b)

    def values(z):
        return profile(np.abs(np.asarray(z)))

    return TestFunction("radial_bump", float(big_b), values, energy, omega)


def _smoothstep(t: np.ndarray) -> np.ndarray:
    """C-infinity transition: 0 for t <= 0, 1 for t >= 1."""
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        f = np.where(t > 0, np.exp(-1.0 / np.maximum(t, 1e-300)), 0.0)
        g = np.where(t < 1, np.exp(-1.0 / np.maximum(1.0 - t, 1e-300)), 0.0)
    return f / (f + g)


def mollified_annulus(r_in: float, r_out: float, width: float | None = None) -> TestFunction:
    """Smoothed indicator of the annulus r_in < |z| < r_out.

    Equals 1 well inside, 0 outside, with C-infinity shoulders of the
    given width (default: 10% of the annulus thickness).
    """
    if not (0.0 <= r_in < r_out):
        raise ParameterError("need 0 <= r_in < r_out")
    if width is None:
        width = 0.1 * (r_out - r_in)
    big_b = r_out + width

    def profile(t):
        t = np.asarray(t, dtype=float)
        rise = _smoothstep((t - (r_in - width)) / width) if r_in > 0 else np.ones_like(t)
        fall = 1.0 - _smoothstep((t - r_out) / width)
        return rise * fall

    energy, omega = _radial_metadata(profile, big_b)

    def values(z):
        return profile(np.abs(np.asarray(z)))

    return TestFunction(
        f"mollified_annulus[{r_in:g},{r_out:g}]", float(big_b), values, energy, omega
    )


def poly_bump(big_b: float = 1.0, poly_coeffs=(0.0, 1.0)) -> TestFunction:
    """Radial polynomial in |z|^2 times the bump, supported on |z| <= B."""
    pc = np.asarray(poly_coeffs, dtype=float)

    def profile(t):
        t = np.asarray(t, dtype=float)
        return np.polyval(pc[::-1], (t / big_b) ** 2) * _bump_profile(t / big_b)

    energy, omega = _radial_metadata(profile, big_b)

    def values(z):
        return profile(np.abs(np.asarray(z)))

    return TestFunction("poly_bump", float(big_b), values, energy, omega)


def linear_statistic(zset: ZeroSet, phi: TestFunction, r: float) -> float:
    """Sum of phi(z_j / r) over the zero set.

    The zero set must have been searched out to at least r * support_radius,
    otherwise zeros contributing to the statistic could be missing.
    """
    if zset.radius < r * phi.support_radius * (1.0 - 1e-12):
        raise CoverageError(
            f"zero search radius {zset.radius:.3g} does not cover "
            f"r * support = {r * phi.support_radius:.3g}"
        )
    if zset.zeros.size == 0:
        return 0.0
    return float(np.sum(phi.values(zset.zeros / r)))
