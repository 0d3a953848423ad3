"""Direct constrained minimization of the log-energy objective.

This module re-derives the closed-form minimizer measures numerically,
with no knowledge of their structure beyond the constraint: it
discretizes radial probability measures as weighted circle atoms on a
fixed grid and minimizes

    J(w) = 2 max_x (U_w(x) - x^beta/(beta*alpha)) - w' K w

over the simplex intersected with the disk mass constraint. The primary
iteration is projected subgradient descent with diminishing steps; an
optional convex QP polish (OSQP on the zero-sum reparameterization,
where the quadratic term is positive semidefinite) sharpens the final
iterate. The polished point is kept only when it lowers J.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import ParameterError, SingularParameterError
from .measures import q_of_p
from .special import WeightModel

__all__ = [
    "DiscretizedRadialMeasure",
    "VarOptResult",
    "build_grid",
    "energy_matrix",
    "minimize_constrained",
    "forbidden_band_mass",
    "atom_mass",
]

CONSTRAINT_LE = "mass_inside_le"
CONSTRAINT_GE = "mass_closed_inside_ge"


@dataclass(frozen=True)
class DiscretizedRadialMeasure:
    """Weighted circle atoms on a fixed radial grid; weights sum to 1."""

    grid: np.ndarray
    weights: np.ndarray
    beta: float

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if g.ndim != 1 or w.shape != g.shape:
            raise ParameterError("grid and weights must be matching 1-d arrays")
        if np.any(np.diff(g) <= 0) or np.any(g <= 0):
            raise ParameterError("grid must be strictly increasing positive radii")
        if np.any(w < -1e-12) or abs(w.sum() - 1.0) > 1e-9:
            raise ParameterError("weights must be nonnegative and sum to 1")
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "weights", w)


@dataclass(frozen=True)
class VarOptResult:
    measure: DiscretizedRadialMeasure
    objective: float
    converged: bool
    iterations: int
    polish_improved: bool


def build_grid(alpha: float, model: WeightModel, p: float, grid_size: int) -> np.ndarray:
    """Geometric radial grid on (0, alpha^(1/beta)] with exact special nodes.

    The nearest grid points are snapped onto radius 1 (the candidate atom
    location), the outer cutoff, and the expected bulk edges p^(1/beta)
    and q^(1/beta) so the support boundaries are representable.
    """
    beta = model.beta
    rmax = alpha ** (1.0 / beta)
    grid = np.geomspace(rmax * 1e-3, rmax, grid_size)
    forced = {1.0, rmax}
    q = q_of_p(p)
    if p > 0:
        forced.add(p ** (1.0 / beta))
    if q > 0:
        forced.add(q ** (1.0 / beta))
    for node in sorted(forced):
        i = int(np.argmin(np.abs(grid - node)))
        grid[i] = node
    return np.unique(grid)


def energy_matrix(grid: np.ndarray) -> np.ndarray:
    """K_ij = log max(r_i, r_j); the diagonal is the circle self-energy log r_i."""
    lg = np.log(np.asarray(grid, dtype=float))
    return np.maximum.outer(lg, lg)


def _project_simplex(v: np.ndarray, mass: float = 1.0) -> np.ndarray:
    """Euclidean projection onto {w >= 0, sum w = mass}."""
    if mass <= 0.0 or len(v) == 0:
        return np.zeros_like(v)
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - mass
    idx = np.arange(1, len(v) + 1)
    rho = idx[u - css / idx > 0][-1]
    theta = css[rho - 1] / rho
    return np.maximum(v - theta, 0.0)


def _project_constrained(v: np.ndarray, mask: np.ndarray, cap: float, sense: str) -> np.ndarray:
    """Exact projection onto the simplex with the disk mass constraint.

    If the plain simplex projection already satisfies the constraint it is
    the answer; otherwise the constraint is tight at the projection and the
    problem splits into two independent simplex projections with masses
    cap and 1 - cap.
    """
    w = _project_simplex(v, 1.0)
    inside = w[mask].sum()
    if (sense == "le" and inside <= cap + 1e-15) or (
        sense == "ge" and inside >= cap - 1e-15
    ):
        return w
    w = np.empty_like(v)
    w[mask] = _project_simplex(v[mask], cap)
    w[~mask] = _project_simplex(v[~mask], 1.0 - cap)
    return w


def _polish_qp(K, P, drift, mask, cap, sense, w_init):
    """One convex QP solve for min 2s - w'Kw with Pw - drift <= s.

    Parameterizes w = w0 + Bz u on the zero-sum subspace, where
    -Bz' K Bz is positive semidefinite, and hands the problem to OSQP
    warm-started at w_init. Returns the candidate weights (feasible by
    construction after re-projection) or None if the solver failed.
    """
    import osqp

    m = K.shape[0]
    w0 = np.full(m, 1.0 / m)
    bz = np.vstack([np.eye(m - 1), -np.ones((1, m - 1))])
    kb = K @ bz
    quad = -(bz.T @ kb)
    quad = 0.5 * (quad + quad.T)
    lin_u = -2.0 * (w0 @ kb)
    p_mat = sp.block_diag([sp.csc_matrix(2.0 * quad), sp.csc_matrix((1, 1))]).tocsc()
    q_vec = np.concatenate([lin_u, [2.0]])
    pb = P @ bz
    chi = mask.astype(float)
    a_mat = sp.vstack(
        [
            sp.hstack([sp.csc_matrix(bz), sp.csc_matrix((m, 1))]),
            sp.hstack([sp.csc_matrix(pb), sp.csc_matrix(-np.ones((P.shape[0], 1)))]),
            sp.hstack([sp.csc_matrix((chi @ bz)[None, :]), sp.csc_matrix((1, 1))]),
        ],
        format="csc",
    )
    cap_rhs = cap - chi @ w0
    lo = np.concatenate(
        [-w0, np.full(P.shape[0], -np.inf), [-np.inf if sense == "le" else cap_rhs]]
    )
    hi = np.concatenate(
        [np.full(m, np.inf), drift - P @ w0, [cap_rhs if sense == "le" else np.inf]]
    )
    prob = osqp.OSQP()
    prob.setup(
        P=p_mat, q=q_vec, A=a_mat, l=lo, u=hi,
        verbose=False, eps_abs=1e-7, eps_rel=1e-7, max_iter=40000, polishing=True,
    )
    prob.warm_start(
        x=np.concatenate([w_init[:-1] - w0[:-1], [np.max(P @ w_init - drift)]])
    )
    res = prob.solve(raise_error=False)
    if res.x is None or not np.all(np.isfinite(res.x)):
        return None
    w = w0 + bz @ res.x[:-1]
    w = np.maximum(w, 0.0)
    s = w.sum()
    if s <= 0:
        return None
    return _project_constrained(w / s, mask, cap, sense)


def minimize_constrained(
    alpha: float,
    model: WeightModel,
    p: float,
    constraint: str,
    grid_size: int = 400,
    max_iters: int = 5000,
    tol: float = 1e-6,
    probe_factor: int = 4,
    polish: bool = True,
) -> VarOptResult:
    """Minimize J over discretized radial probability measures.

    constraint selects the side of the disk mass condition:
    mass_inside_le keeps the open-disk mass at or below p/alpha,
    mass_closed_inside_ge forces the closed-disk mass to at least p/alpha.
    Projected subgradient descent (steps ~ 1/(|g| sqrt(k)), best-iterate
    tracking) runs until the best objective stops improving by tol over a
    200-iteration window, then the QP polish refines the answer.
    """
    beta = model.beta
    if not (alpha > math.e):
        raise ParameterError(f"alpha must exceed e, got {alpha}")
    if p == 1.0:
        raise SingularParameterError("p = 1 is excluded")
    if p < 0 or p >= alpha:
        raise ParameterError(f"infeasible level p = {p} at alpha = {alpha}")
    if constraint not in (CONSTRAINT_LE, CONSTRAINT_GE):
        raise ParameterError(f"unknown constraint {constraint!r}")
    if grid_size < 200:
        raise ParameterError("grid_size must be at least 200")
    sense = "le" if constraint == CONSTRAINT_LE else "ge"
    grid = build_grid(alpha, model, p, grid_size)
    m = len(grid)
    lg = np.log(grid)
    K = np.maximum.outer(lg, lg)
    probe = np.concatenate(
        [[0.0], np.geomspace(grid[0] * 0.5, grid[-1], probe_factor * grid_size)]
    )
    P = np.maximum.outer(np.log(np.maximum(probe, 1e-300)), lg)
    P[0] = lg  # log max(0, r_i) = log r_i
    drift = probe**beta / (beta * alpha)
    mask = grid < 1.0 if sense == "le" else grid <= 1.0
    cap = p / alpha

    def objective(wv):
        return 2.0 * np.max(P @ wv - drift) - wv @ K @ wv

    # start from the base measure's cell masses, projected to feasibility
    edges = np.concatenate([[0.0], np.sqrt(grid[:-1] * grid[1:]), [grid[-1]]])
    w = (edges[1:] ** beta - edges[:-1] ** beta) / alpha
    w = _project_constrained(w / w.sum(), mask, cap, sense)

    best_w, best_j = w.copy(), objective(w)
    window_best = best_j
    converged = False
    iterations = 0
    for k in range(max_iters):
        iterations = k + 1
        u = P @ w - drift
        j_hot = int(np.argmax(u))
        kw = K @ w
        j_val = 2.0 * u[j_hot] - w @ kw
        if j_val < best_j:
            best_j, best_w = j_val, w.copy()
        g = 2.0 * P[j_hot] - 2.0 * kw
        gn = np.linalg.norm(g)
        if gn == 0.0:
            converged = True
            break
        w = _project_constrained(w - (0.1 / (gn * math.sqrt(k + 1.0))) * g, mask, cap, sense)
        if (k + 1) % 200 == 0:
            if window_best - best_j < tol:
                converged = True
                break
            window_best = best_j

    polish_improved = False
    if polish:
        cand = _polish_qp(K, P, drift, mask, cap, sense, best_w)
        if cand is not None:
            j_cand = objective(cand)
            if j_cand < best_j:
                best_w, best_j = cand, j_cand
                polish_improved = True
                converged = True

    measure = DiscretizedRadialMeasure(grid=grid, weights=best_w, beta=beta)
    return VarOptResult(
        measure=measure,
        objective=float(best_j),
        converged=converged,
        iterations=iterations,
        polish_improved=polish_improved,
    )


def forbidden_band_mass(dm: DiscretizedRadialMeasure, p: float) -> float:
    """Weight falling strictly inside the gap of the closed-form minimizer.

    The gap is the annulus between the bulk edges (excluding the edges
    themselves and the unit circle where the atom sits).
    """
    beta = dm.beta
    q = q_of_p(p)
    if p < 1.0:
        lo_edge = p ** (1.0 / beta) if p > 0 else 0.0
        hi_edge = q ** (1.0 / beta)
    elif p < math.e:
        lo_edge, hi_edge = q ** (1.0 / beta), p ** (1.0 / beta)
    else:
        lo_edge, hi_edge = 0.0, p ** (1.0 / beta)
    g, w = dm.grid, dm.weights
    band = (g > 1.0) & (g < hi_edge)
    if lo_edge > 0.0:
        band |= (g > lo_edge) & (g < 1.0)
    return float(w[band].sum())


def atom_mass(dm: DiscretizedRadialMeasure, radius: float = 1.0) -> float:
    """Weight sitting exactly on the given radius (one snapped grid node)."""
    return float(dm.weights[np.isclose(dm.grid, radius, rtol=1e-12, atol=0.0)].sum())
