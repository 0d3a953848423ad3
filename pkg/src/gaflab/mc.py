"""Monte Carlo experiments: hole probabilities, forbidden-band depletion,
dominant-monomial lower-bound events, and conditional linear statistics.

Reproducibility contract: every trial draws from a counter-based
substream keyed by (seed, trial_index), and trials are aggregated in
fixed chunks of 512, so results are byte-identical no matter how many
worker threads run the chunks.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .errors import CoverageError, ParameterError
from .gaf import GafSample, standard_complex_gaussians
from .measures import RadialMeasure, limiting_measure, z_of_p
from .special import TruncationPlan, WeightModel, log_coefficient
from .zeros import TestFunction, count_zeros_argument, find_zeros

__all__ = [
    "HoleExperiment",
    "DepletionReport",
    "make_hole_plan",
    "estimate_hole_probability",
    "depletion_statistic",
    "dominant_monomial_probability",
    "conditional_linear_statistics",
    "wilson_interval",
]

_CHUNK = 512


def wilson_interval(count: int, trials: int, z: float = 1.959963984540054):
    """Wilson 95% confidence interval for a binomial proportion."""
    if trials <= 0:
        return (0.0, 1.0)
    phat = count / trials
    denom = 1.0 + z * z / trials
    center = (phat + z * z / (2 * trials)) / denom
    half = (z / denom) * math.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials))
    return (max(0.0, center - half), min(1.0, center + half))


def make_hole_plan(model: WeightModel, r: float) -> TruncationPlan:
    """Truncation plan sized for hole experiments at disk radius r.

    The support multiplier 1.5 makes the validated zero-search region
    2*B*r_plan reach 3r, and alpha is pushed up to the tail-bound
    hypothesis floor (4B)^beta so the discarded tail is certifiably
    negligible on |z| <= B*r_plan.
    """
    from .special import make_truncation_plan

    beta = model.beta
    big_b = 1.5
    r_plan = max(r, 1.05)
    alpha = max((4.0 * big_b) ** beta * 1.0001, 4.0**beta * math.e)
    return make_truncation_plan(r_plan, model, alpha=alpha, big_b=big_b)


@dataclass(frozen=True)
class HoleExperiment:
    """Results of a rejection estimate of the hole probability."""

    model: WeightModel
    plan: TruncationPlan
    trials: int
    seed: int
    hole_radius: float
    search_radius: float
    hole_count: int
    p_hat: float
    ci95: tuple
    conditional_zero_radii: np.ndarray
    unconditional_zero_radii: np.ndarray
    flagged: bool = False


def _horner_rows(coeffs_desc: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Row-wise Horner: polynomial i (descending coeffs) at points u[i, :]."""
    acc = np.broadcast_to(coeffs_desc[:, 0:1], u.shape).astype(complex).copy()
    for k in range(1, coeffs_desc.shape[1]):
        acc *= u
        acc += coeffs_desc[:, k : k + 1]
    return acc


def _polish_rows(coeffs_asc: np.ndarray, u: np.ndarray, iters: int = 8) -> np.ndarray:
    n_coef = coeffs_asc.shape[1]
    rev = coeffs_asc[:, ::-1]
    drev = (coeffs_asc[:, 1:] * np.arange(1, n_coef))[:, ::-1]
    for _ in range(iters):
        p = _horner_rows(rev, u)
        dp = _horner_rows(drev, u)
        safe = np.abs(dp) > 0
        step = np.where(safe, p / np.where(safe, dp, 1.0), 0.0)
        step = np.where(np.abs(step) > 0.5 * (1.0 + np.abs(u)), 0.0, step)
        u = u - step
        if np.max(np.abs(step)) < 1e-13 * (1.0 + np.max(np.abs(u))):
            break
    return u


def _hole_chunk(model, plan, r, search_radius, seed, start, stop):
    """Process one block of trials with stacked linear algebra.

    Winding numbers come from a single contour evaluation per block and
    roots from a batched companion eigensolve; any trial whose contour
    data looks marginal (near-circle zero, oversized phase step) is
    recomputed through the adaptive scalar path so the counts always
    match per-trial count_zeros_argument.
    """
    n = stop - start
    n_deg = plan.n_trunc
    rho0 = plan.r
    ks = np.arange(n_deg + 1)
    scale = np.exp(log_coefficient(ks, model) + ks * math.log(rho0))
    xi = np.empty((n, n_deg + 1), dtype=complex)
    for i, idx in enumerate(range(start, stop)):
        xi[i] = standard_complex_gaussians(n_deg + 1, seed, idx)
    coeffs = xi * scale

    # zero counts in D(0, r) by one shared contour
    m = max(512, 8 * n_deg)
    w_pts = (r / rho0) * np.exp(2j * math.pi * np.arange(m) / m)
    vand = w_pts[None, :] ** ks[:, None]
    vals = coeffs @ vand
    with np.errstate(divide="ignore", invalid="ignore"):
        mags = np.abs(vals)
        steps = np.angle(np.roll(vals, -1, axis=1) / vals)
        totals = steps.sum(axis=1) / (2.0 * math.pi)
        winds = np.rint(totals)
        robust = (
            (mags.min(axis=1) >= 1e-12 * mags.max(axis=1))
            & (np.abs(steps).max(axis=1) < 0.5 * math.pi)
            & (np.abs(totals - winds) < 1e-6)
        )
    counts = np.where(np.isfinite(winds), winds, 0.0).astype(int)

    # roots by stacked companion matrices
    lead_ok = np.abs(coeffs[:, -1]) > 1e-300
    batch = np.flatnonzero(lead_ok)
    radii_rows: list[np.ndarray] = [np.empty(0)] * n
    if batch.size:
        c_b = coeffs[batch]
        desc = c_b[:, ::-1]
        comp = np.zeros((batch.size, n_deg, n_deg), dtype=complex)
        comp[:, 0, :] = -desc[:, 1:] / desc[:, :1]
        sub = np.arange(n_deg - 1)
        comp[:, sub + 1, sub] = 1.0
        u_roots = np.linalg.eigvals(comp)
        u_roots = _polish_rows(c_b, u_roots)
        z_abs = np.abs(u_roots) * rho0
        inside = z_abs <= search_radius * (1.0 + 1e-12)
        for row, i in enumerate(batch):
            radii_rows[i] = np.sort(z_abs[row][inside[row]]) / r
    fallback = sorted(set(np.flatnonzero(~robust)) | set(np.flatnonzero(~lead_ok)))
    for i in fallback:
        sample = GafSample(model=model, plan=plan, xi=xi[i], seed=seed, stream_id=start + i)
        counts[i] = count_zeros_argument(sample, r)
        zset = find_zeros(sample, search_radius, trim_degree=True)
        radii_rows[i] = np.sort(np.abs(zset.zeros)) / r

    holes = 0
    cond: list[np.ndarray] = []
    uncond: list[np.ndarray] = []
    for i in range(n):
        uncond.append(radii_rows[i])
        if counts[i] == 0:
            holes += 1
            cond.append(radii_rows[i])
    return holes, cond, uncond


def estimate_hole_probability(
    model: WeightModel,
    plan: TruncationPlan,
    r: float,
    trials: int,
    seed: int,
    threads: int = 1,
) -> HoleExperiment:
    """Rejection estimate of P[no zeros in D(0, r)] for the truncated sample.

    Each trial counts zeros by the argument principle; all trials also
    record scaled zero radii out to 3r (for depletion statistics), and
    accepted trials contribute them to the conditional list.
    """
    if trials < 100:
        raise ParameterError("need at least 100 trials")
    search_radius = 3.0 * r
    if search_radius > 2.0 * plan.big_b * plan.r * (1.0 + 1e-12):
        raise CoverageError(
            f"plan validates zero search only to {2.0 * plan.big_b * plan.r:.3g}, "
            f"need {search_radius:.3g}; use make_hole_plan"
        )
    spans = [(s, min(s + _CHUNK, trials)) for s in range(0, trials, _CHUNK)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(
                pool.map(
                    lambda sp: _hole_chunk(model, plan, r, search_radius, seed, *sp),
                    spans,
                )
            )
    else:
        parts = [_hole_chunk(model, plan, r, search_radius, seed, *sp) for sp in spans]
    hole_count = sum(p[0] for p in parts)
    cond_lists = [arr for p in parts for arr in p[1]]
    uncond_lists = [arr for p in parts for arr in p[2]]
    cond = np.concatenate(cond_lists) if cond_lists else np.empty(0)
    uncond = np.concatenate(uncond_lists) if uncond_lists else np.empty(0)
    return HoleExperiment(
        model=model,
        plan=plan,
        trials=trials,
        seed=seed,
        hole_radius=float(r),
        search_radius=search_radius,
        hole_count=hole_count,
        p_hat=hole_count / trials,
        ci95=wilson_interval(hole_count, trials),
        conditional_zero_radii=cond,
        unconditional_zero_radii=uncond,
        flagged=(hole_count == 0),
    )


@dataclass(frozen=True)
class DepletionReport:
    band_frac_cond: float
    band_frac_uncond: float
    zscore: float
    ok: bool
    note: str = ""


def depletion_statistic(experiment: HoleExperiment) -> DepletionReport:
    """Fraction of scaled zeros inside the forbidden annulus, conditional
    versus unconditional, with a two-proportion z-score (positive means
    the conditional zeros avoid the band)."""
    model = experiment.model
    lo, hi = model.hole_inner, model.hole_outer
    if experiment.search_radius < experiment.hole_radius * hi * 1.2:
        raise CoverageError("zero lists do not cover the forbidden band with margin")
    if experiment.hole_count < 10:
        return DepletionReport(math.nan, math.nan, math.nan, False, "fewer than 10 accepted trials")
    cond = experiment.conditional_zero_radii
    uncond = experiment.unconditional_zero_radii
    if cond.size == 0 or uncond.size == 0:
        return DepletionReport(math.nan, math.nan, math.nan, False, "no zeros recorded")
    in_band_c = np.count_nonzero((cond > lo) & (cond < hi))
    in_band_u = np.count_nonzero((uncond > lo) & (uncond < hi))
    f_c = in_band_c / cond.size
    f_u = in_band_u / uncond.size
    pooled = (in_band_c + in_band_u) / (cond.size + uncond.size)
    denom = math.sqrt(pooled * (1 - pooled) * (1 / cond.size + 1 / uncond.size))
    z = (f_u - f_c) / denom if denom > 0 else math.nan
    return DepletionReport(f_c, f_u, z, True)


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def _plan_for_degree(model: WeightModel, n_trunc: int, alpha: float, r_ref: float) -> TruncationPlan:
    """A consistent TruncationPlan wrapper around an externally chosen degree."""
    beta = model.beta
    s = 2.0 + 4.0 * beta
    gamma = r_ref ** (-s)
    m0 = r_ref ** (2.0 * beta)
    k0_shift = 2.0 * m0 * gamma
    lo, hi = math.log(r_ref), 2.0 * math.log(r_ref)
    return TruncationPlan(
        r=r_ref,
        alpha=alpha,
        n_trunc=n_trunc,
        s=s,
        gamma=gamma,
        t=gamma,
        big_b=1.0,
        m0=m0,
        k0_shift=k0_shift,
        l_scale=(r_ref - k0_shift) / (1.0 + gamma),
        alpha_in_range=(lo <= alpha <= hi),
    )


def dominant_monomial_probability(
    model: WeightModel,
    r: float,
    p: float,
    trials: int,
    seed: int,
    check_inclusion: bool = True,
):
    """Probability that one monomial dominates the whole series on |z| = r.

    The event {|xi_k0| b_k0 > sum_{k != k0} |xi_k| b_k} forces exactly
    k0 = floor(beta*p*r^beta/2) zeros in D(0, r). The series is cut at
    the scale alpha = 4^beta * e and the discarded tail enters the sum
    as its deterministic sup bound, so the inclusion is exact for the
    truncated polynomial as well; with check_inclusion the zero count is
    verified by the argument principle on every event trial.
    """
    beta = model.beta
    alpha = 4.0**beta * math.e
    n_trunc = max(1, _round_half_up(0.5 * beta * alpha * r**beta))
    k0 = int(math.floor(0.5 * beta * p * r**beta))
    if k0 > n_trunc:
        raise ParameterError(f"target count k0 = {k0} exceeds truncation degree {n_trunc}")
    ks = np.arange(n_trunc + 1)
    log_b = ks * math.log(r) + log_coefficient(ks, model)
    b = np.exp(log_b)
    # deterministic tail constant: sup of the discarded series on |z| <= r
    log_tail = (n_trunc / beta) * math.log(4.0 / alpha)
    tail_const = math.exp(log_tail)
    plan = _plan_for_degree(model, n_trunc, alpha, max(r, 1.05))
    hits = 0
    violations = 0
    checked = 0
    for idx in range(trials):
        xi = standard_complex_gaussians(n_trunc + 1, seed, idx)
        mags = np.abs(xi) * b
        rest = mags.sum() - mags[k0] + tail_const
        if mags[k0] > rest:
            hits += 1
            if check_inclusion:
                sample = GafSample(model=model, plan=plan, xi=xi, seed=seed, stream_id=idx)
                checked += 1
                if count_zeros_argument(sample, r) != k0:
                    violations += 1
    return {
        "p_hat": hits / trials,
        "ci95": wilson_interval(hits, trials),
        "log_lower_bound": -(0.5 * beta * z_of_p(p)) * r ** (2.0 * beta),
        "k0": k0,
        "n_trunc": n_trunc,
        "n_event": hits,
        "n_checked": checked,
        "n_violations": violations,
    }


def _integral_against_measure(mu: RadialMeasure, phi: TestFunction) -> float:
    """int phi d(mu) for radial phi, atoms exactly and pieces by quadrature."""
    total = 0.0
    for radius, mass in mu.circle_atoms:
        total += mass * float(phi.values(np.array([radius + 0.0j]))[0])
    beta = mu.beta
    for a, b, c in mu.annulus_pieces:
        b_eff = min(b, phi.support_radius)
        if b_eff <= a:
            continue
        val, _ = quad(
            lambda t: float(phi.values(np.array([t + 0.0j]))[0]) * beta * t ** (beta - 1.0),
            a,
            b_eff,
            limit=200,
        )
        total += c * val
    return total


def conditional_linear_statistics(experiment: HoleExperiment, phi: TestFunction):
    """Mean of the scaled linear statistic over accepted trials, against the
    limit-measure target r^beta * int phi d(mu_0).

    The gap is descriptive: the asymptotic regime is far beyond feasible
    radii, so no tolerance is attached to it.
    """
    r = experiment.hole_radius
    if phi.support_radius * r > experiment.search_radius * (1.0 + 1e-12):
        raise CoverageError(
            f"test function support {phi.support_radius:g} (scaled) exceeds "
            f"zero coverage {experiment.search_radius / r:g}"
        )
    mu0 = limiting_measure(experiment.model, 0.0)
    target = r**experiment.model.beta * _integral_against_measure(mu0, phi)
    if experiment.hole_count < 30:
        return {
            "mean_cond": math.nan,
            "target": target,
            "gap": math.nan,
            "ok": False,
            "n_accepted": experiment.hole_count,
        }
    vals = phi.values(experiment.conditional_zero_radii.astype(complex))
    mean_cond = float(np.sum(vals)) / experiment.hole_count
    return {
        "mean_cond": mean_cond,
        "target": target,
        "gap": mean_cond - target,
        "ok": True,
        "n_accepted": experiment.hole_count,
    }
