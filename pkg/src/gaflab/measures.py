"""Radially symmetric measures, their potentials, and energy functionals.

A RadialMeasure is a finite combination of uniform circle measures
("atoms") and annular pieces carrying a constant multiple of the base
measure with polar density (beta/2pi) t^(beta-1) dt dtheta. For such
measures every logarithmic potential and energy integral reduces to
closed form through the classical angular average

    (1/2pi) int_0^2pi log|s e^{i phi} - t| dphi = log max(s, t),

so nothing in this module uses numerical quadrature; the function named
potential_quadrature is the independent evaluation route (piece by
piece from the definition) used to cross-check the hand-derived global
piecewise formula in potential_closed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DomainError,
    EmptyBulkError,
    ParameterError,
    SingularParameterError,
    UnsupportedRegimeError,
)
from .special import WeightModel

__all__ = [
    "RadialMeasure",
    "HoleParams",
    "EnergyReport",
    "q_of_p",
    "z_of_p",
    "hole_params",
    "minimizer_measure",
    "limiting_measure",
    "potential_closed",
    "potential_quadrature",
    "b_functional",
    "log_energy",
    "equilibrium_report",
]


# ---------------------------------------------------------------------------
# scalar functions q(p) and Z_p

def _h(x: float) -> float:
    return x * (math.log(x) - 1.0) if x > 0 else 0.0


def q_of_p(p: float) -> float:
    """Conjugate level q: the positive solution != p of q(log q - 1) = p(log p - 1).

    q(0) = e by convention, q = 0 for p >= e, and p = 1 is singular
    (the equation degenerates there).
    """
    if p < 0:
        raise DomainError(f"p must be nonnegative, got {p}")
    if p == 1.0:
        raise SingularParameterError("p = 1 has no conjugate level")
    if p == 0.0:
        return math.e
    if p >= math.e:
        return 0.0
    # x(log x - 1) is strictly decreasing on (0,1), increasing on (1,e),
    # hitting the same values on both sides; bisect on the opposite side.
    target = _h(p)
    lo, hi = (1.0, math.e) if p < 1.0 else (1e-300, 1.0)
    flo = _h(lo) - target
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fm = _h(mid) - target
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
        if hi - lo < 1e-15:
            break
    return 0.5 * (lo + hi)


def z_of_p(p: float) -> float:
    """Rate constant Z_p of the scaled zero-count deviation."""
    if p < 0:
        raise DomainError(f"p must be nonnegative, got {p}")
    if p == 1.0:
        raise SingularParameterError("p = 1 is the zero-rate singular point")
    if p >= math.e:
        return 0.25 * p * p * (2.0 * math.log(p) - 1.0)
    q = q_of_p(p)
    t_q = q * q * (2.0 * math.log(q) - 1.0) if q > 0 else 0.0
    t_p = p * p * (2.0 * math.log(p) - 1.0) if p > 0 else 0.0
    return abs(0.25 * (t_q - t_p))


@dataclass(frozen=True)
class HoleParams:
    """Level p with its conjugate q, rate constant Z_p, and regime tag."""

    p: float
    q: float
    z_p: float
    regime: str  # p_eq_0 | p_lt_1 | p_in_1_e | p_ge_e


def hole_params(p: float) -> HoleParams:
    q = q_of_p(p)
    z = z_of_p(p)
    if p == 0.0:
        regime = "p_eq_0"
    elif p < 1.0:
        regime = "p_lt_1"
    elif p < math.e:
        regime = "p_in_1_e"
    else:
        regime = "p_ge_e"
    return HoleParams(p=float(p), q=q, z_p=z, regime=regime)


# ---------------------------------------------------------------------------
# measures

@dataclass(frozen=True)
class RadialMeasure:
    """Circle atoms plus annular pieces of the base radial measure.

    circle_atoms: tuple of (radius, mass); each is the uniform
    probability measure on |z| = radius scaled by mass.
    annulus_pieces: tuple of (r_in, r_out, coeff); each contributes
    coeff times the base measure (density (beta/2pi) t^(beta-1) dt dtheta)
    restricted to r_in <= |z| <= r_out, hence mass coeff*(r_out^beta - r_in^beta).
    r_out may be math.inf for limit objects; such measures have infinite
    total mass and are rejected by the energy routines.
    """

    circle_atoms: tuple
    annulus_pieces: tuple
    beta: float

    def __post_init__(self):
        if not (self.beta > 0):
            raise DomainError(f"beta must be positive, got {self.beta}")
        atoms = tuple((float(r), float(m)) for r, m in self.circle_atoms)
        pieces = tuple((float(a), float(b), float(c)) for a, b, c in self.annulus_pieces)
        for r, m in atoms:
            if r <= 0 or m < 0:
                raise ParameterError(f"bad circle atom (radius {r}, mass {m})")
        for a, b, c in pieces:
            if not (0.0 <= a < b) or c < 0:
                raise ParameterError(f"bad annulus piece ({a}, {b}, {c})")
        ordered = sorted(pieces)
        for (a1, b1, _), (a2, _, _) in zip(ordered, ordered[1:]):
            if a2 < b1 - 1e-15 * max(1.0, b1):
                raise ParameterError("annulus pieces overlap")
        object.__setattr__(self, "circle_atoms", atoms)
        object.__setattr__(self, "annulus_pieces", pieces)

    @property
    def bounded(self) -> bool:
        return all(math.isfinite(b) for _, b, _ in self.annulus_pieces)

    def total_mass(self) -> float:
        if not self.bounded:
            return math.inf
        mass = sum(m for _, m in self.circle_atoms)
        mass += sum(c * (b**self.beta - a**self.beta) for a, b, c in self.annulus_pieces)
        return mass


def minimizer_measure(alpha: float, model: WeightModel, p: float) -> RadialMeasure:
    """The constrained-energy minimizer at scale alpha and level p.

    Three regimes: for p < 1 the unit circle carries mass (q-p)/alpha and
    the base-measure bulk is split at p^(1/beta) and q^(1/beta); for
    1 < p < e the roles of p and q swap; for p >= e there is no inner
    bulk at all and the circle atom carries p/alpha.
    """
    beta = model.beta
    if p < 0:
        raise DomainError(f"p must be nonnegative, got {p}")
    if p == 1.0:
        raise SingularParameterError("p = 1 is excluded")
    if not (alpha > math.e):
        raise ParameterError(f"alpha must exceed e, got {alpha}")
    if p * (1.0 + 1e-9) >= alpha:
        raise EmptyBulkError(f"level p = {p} leaves no bulk below alpha = {alpha}")
    q = q_of_p(p)
    if p < 1.0:
        inner, outer, atom_mass = p, q, (q - p) / alpha
    elif p < math.e:
        inner, outer, atom_mass = q, p, (p - q) / alpha
    else:
        inner, outer, atom_mass = 0.0, p, p / alpha
    pieces = []
    if inner > 0.0:
        pieces.append((0.0, inner ** (1.0 / beta), 1.0 / alpha))
    pieces.append((outer ** (1.0 / beta), alpha ** (1.0 / beta), 1.0 / alpha))
    return RadialMeasure(
        circle_atoms=((1.0, atom_mass),),
        annulus_pieces=tuple(pieces),
        beta=beta,
    )


def limiting_measure(model: WeightModel, p: float) -> RadialMeasure:
    """Scaled large-alpha limit of the minimizer family, defined for p in [0,1).

    Total mass is infinite; the outer piece extends to r_out = inf.
    """
    if not (0.0 <= p < 1.0):
        raise UnsupportedRegimeError(f"limit measure defined for p in [0,1), got {p}")
    beta = model.beta
    q = q_of_p(p)
    pieces = []
    if p > 0.0:
        pieces.append((0.0, p ** (1.0 / beta), 0.5 * beta))
    pieces.append((q ** (1.0 / beta), math.inf, 0.5 * beta))
    return RadialMeasure(
        circle_atoms=((1.0, 0.5 * beta * (q - p)),),
        annulus_pieces=tuple(pieces),
        beta=beta,
    )


# ---------------------------------------------------------------------------
# potentials

def _antideriv_log(t: float, beta: float) -> float:
    """Antiderivative of beta t^(beta-1) log t, vanishing at 0."""
    return 0.0 if t == 0.0 else t**beta * (math.log(t) - 1.0 / beta)


def _antideriv_log2(t: float, beta: float) -> float:
    """Antiderivative of 2 beta t^(2beta-1) log t, vanishing at 0."""
    return 0.0 if t == 0.0 else t ** (2 * beta) * math.log(t) - t ** (2 * beta) / (2 * beta)


def _piece_potential(a: float, b: float, c: float, beta: float, x: float) -> float:
    """Potential at radius x of coeff c times the base measure on [a, b]."""
    if x <= a:
        return c * (_antideriv_log(b, beta) - _antideriv_log(a, beta))
    if x >= b:
        return c * math.log(x) * (b**beta - a**beta)
    return c * (
        math.log(x) * (x**beta - a**beta)
        + _antideriv_log(b, beta)
        - _antideriv_log(x, beta)
    )


def potential_quadrature(mu: RadialMeasure, x, truncation_radius: float | None = None):
    """Logarithmic potential of mu at radius x, piece by piece from the definition.

    Exact up to floating error: circle atoms give mass * log max(x, R),
    annulus pieces integrate log max(x, t) against the base density in
    closed form. Unbounded measures need an explicit truncation_radius.
    Accepts scalar or array x.
    """
    atoms = mu.circle_atoms
    pieces = mu.annulus_pieces
    if not mu.bounded:
        if truncation_radius is None:
            raise ParameterError("unbounded measure: pass truncation_radius")
        pieces = tuple(
            (a, min(b, truncation_radius), c) for a, b, c in pieces if a < truncation_radius
        )
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(xs < 0):
        raise DomainError("potential evaluated at negative radius")
    out = np.zeros_like(xs)
    for i, xi in enumerate(xs):
        u = 0.0
        for r, m in atoms:
            u += m * math.log(max(xi, r))
        for a, b, c in pieces:
            u += _piece_potential(a, b, c, mu.beta, xi)
        out[i] = u
    if np.isscalar(x) or np.asarray(x).ndim == 0:
        return float(out[0])
    return out


def potential_closed(mu: RadialMeasure, alpha: float, model: WeightModel, p: float, x):
    """Closed-form potential of the minimizer measure, as one global piecewise formula.

    Five branches in the radius: inside the inner bulk edge and between
    the outer bulk edge and alpha^(1/beta) the potential is
    (log(alpha)-1)/beta + x^beta/(beta*alpha); across the gap it grows
    logarithmically with slope set by the adjacent bulk level; beyond
    alpha^(1/beta) it is log x. Must agree with potential_quadrature(mu).
    """
    beta = model.beta
    if mu.beta != beta:
        raise ParameterError("measure and model disagree on beta")
    if p == 1.0:
        raise SingularParameterError("p = 1 is excluded")
    q = q_of_p(p)
    inner, outer = (min(p, q), max(p, q)) if p < math.e else (0.0, p)
    h_c = outer * math.log(outer) - outer if outer > 0 else 0.0
    h_i = inner * math.log(inner) - inner if inner > 0 else 0.0
    x_inner = inner ** (1.0 / beta) if inner > 0 else 0.0
    x_outer = outer ** (1.0 / beta)
    x_edge = alpha ** (1.0 / beta)
    base = (math.log(alpha) - 1.0) / beta

    xs = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(xs < 0):
        raise DomainError("potential evaluated at negative radius")
    out = np.empty_like(xs)
    for i, xi in enumerate(xs):
        if xi <= x_inner:
            out[i] = base + xi**beta / (beta * alpha) + (h_i - h_c) / (beta * alpha)
        elif xi <= 1.0:
            out[i] = inner * math.log(xi) / alpha + base - h_c / (beta * alpha)
        elif xi < x_outer:
            out[i] = outer * math.log(xi) / alpha + base - h_c / (beta * alpha)
        elif xi <= x_edge:
            out[i] = base + xi**beta / (beta * alpha)
        else:
            out[i] = math.log(xi)
    if np.isscalar(x) or np.asarray(x).ndim == 0:
        return float(out[0])
    return out


# ---------------------------------------------------------------------------
# energy functionals

def b_functional(mu: RadialMeasure, alpha: float, model: WeightModel, grid_size: int = 2000) -> float:
    """2 sup_x (U_mu(x) - x^beta/(beta*alpha)), the sup restricted to [0, alpha^(1/beta)].

    Grid scan plus golden-section refinement around the best grid point
    (absolute tolerance 1e-10 in x).
    """
    beta = model.beta
    x_max = alpha ** (1.0 / beta)

    def objective(xv):
        return potential_quadrature(mu, xv) - np.asarray(xv) ** beta / (beta * alpha)

    grid = np.linspace(0.0, x_max, grid_size)
    special = [r for r, _ in mu.circle_atoms]
    for a, b, c in mu.annulus_pieces:
        special.extend([a, min(b, x_max)])
    grid = np.unique(np.concatenate([grid, np.asarray(special, dtype=float)]))
    vals = objective(grid)
    i_best = int(np.argmax(vals))
    lo = grid[max(0, i_best - 1)]
    hi = grid[min(len(grid) - 1, i_best + 1)]
    # golden-section on [lo, hi]
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a_, b_ = lo, hi
    c_ = b_ - invphi * (b_ - a_)
    d_ = a_ + invphi * (b_ - a_)
    fc = float(objective(c_))
    fd = float(objective(d_))
    while b_ - a_ > 1e-10:
        if fc > fd:
            b_, d_, fd = d_, c_, fc
            c_ = b_ - invphi * (b_ - a_)
            fc = float(objective(c_))
        else:
            a_, c_, fc = c_, d_, fd
            d_ = a_ + invphi * (b_ - a_)
            fd = float(objective(d_))
    best = max(float(vals[i_best]), fc, fd)
    return 2.0 * best


def _piece_self_energy(a: float, b: float, c: float, beta: float) -> float:
    return 2.0 * c * c * (
        0.5 * (_antideriv_log2(b, beta) - _antideriv_log2(a, beta))
        - a**beta * (_antideriv_log(b, beta) - _antideriv_log(a, beta))
    )


def _piece_cross_energy(a1, b1, c1, a2, b2, c2, beta) -> float:
    """Integral over piece 1 of the potential of piece 2 (ordered-pair energy)."""
    total = 0.0
    cuts = sorted({a1, b1, max(a1, min(b1, a2)), max(a1, min(b1, b2))})
    for lo, hi in zip(cuts, cuts[1:]):
        if hi <= lo:
            continue
        mid = 0.5 * (lo + hi)
        if mid <= a2:
            total += (hi**beta - lo**beta) * (
                _antideriv_log(b2, beta) - _antideriv_log(a2, beta)
            )
        elif mid >= b2:
            total += (b2**beta - a2**beta) * (
                _antideriv_log(hi, beta) - _antideriv_log(lo, beta)
            )
        else:
            def _f(s):
                return (
                    s ** (2 * beta) / (2 * beta)
                    - a2**beta * _antideriv_log(s, beta)
                    + _antideriv_log(b2, beta) * s**beta
                )
            total += _f(hi) - _f(lo)
    return c1 * c2 * total


def log_energy(mu: RadialMeasure) -> float:
    """Logarithmic energy of mu: the double integral of log|z - w|.

    All pairwise interactions are in closed form via the angular-average
    reduction. Atoms sharing a radius are merged first; the self-energy
    of a circle atom of mass m at radius R is m^2 log R (no singularity
    for circle-uniform measures).
    """
    if not mu.bounded:
        raise ParameterError("log_energy needs a bounded measure")
    beta = mu.beta
    merged: dict[float, float] = {}
    for r, m in mu.circle_atoms:
        merged[r] = merged.get(r, 0.0) + m
    atoms = [(r, m) for r, m in sorted(merged.items()) if m > 0]
    pieces = [pc for pc in mu.annulus_pieces if pc[2] > 0]
    total = 0.0
    for r1, m1 in atoms:
        for r2, m2 in atoms:
            total += m1 * m2 * math.log(max(r1, r2))
    for r, m in atoms:
        for a, b, c in pieces:
            # ordered pairs atom->piece and piece->atom coincide by symmetry
            total += 2.0 * m * _piece_potential(a, b, c, beta, r)
    for i, p1 in enumerate(pieces):
        for j, p2 in enumerate(pieces):
            if i == j:
                total += _piece_self_energy(*p1, beta)
            else:
                total += _piece_cross_energy(*p1, *p2, beta)
    return total


@dataclass(frozen=True)
class EnergyReport:
    """Energy functionals of a candidate equilibrium measure."""

    b_value: float
    sigma_value: float
    i_value: float
    g_max: float
    g_support_dev: float
    probe_grid: np.ndarray


def equilibrium_report(
    mu: RadialMeasure, alpha: float, model: WeightModel, p: float, grid_size: int = 2000
) -> EnergyReport:
    """Populate the energy functionals and equilibrium diagnostics for mu.

    g(x) = U_mu(x) - x^beta/(beta*alpha) - b_value/2 must vanish on the
    bulk support and stay nonpositive everywhere for a true minimizer;
    g_max is its maximum over the probe grid, g_support_dev the largest
    |g| sampled on the declared support pieces.
    """
    if abs(mu.total_mass() - 1.0) > 1e-9:
        raise ParameterError("equilibrium_report expects a probability measure")
    beta = model.beta
    b_val = b_functional(mu, alpha, model, grid_size=grid_size)
    sigma = log_energy(mu)
    x_max = alpha ** (1.0 / beta)
    probe = np.linspace(0.0, x_max, grid_size)

    def g(xv):
        return (
            potential_quadrature(mu, xv)
            - np.asarray(xv, dtype=float) ** beta / (beta * alpha)
            - 0.5 * b_val
        )

    g_max = float(np.max(g(probe)))
    devs = []
    for a, b, c in mu.annulus_pieces:
        b_eff = min(b, x_max)
        if b_eff <= a:
            continue
        xs = np.linspace(a, b_eff, 200)
        devs.append(np.max(np.abs(g(xs))))
    g_support_dev = float(max(devs)) if devs else 0.0
    return EnergyReport(
        b_value=b_val,
        sigma_value=sigma,
        i_value=b_val - sigma,
        g_max=g_max,
        g_support_dev=g_support_dev,
        probe_grid=probe,
    )
