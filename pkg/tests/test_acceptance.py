"""Acceptance suite: one test per numbered criterion, at stated tolerances.

Each test prints a single summary line (visible with -s or on failure) in
addition to its pass/fail status. Criterion 11 documents a known failure:
the conditional zero radii at feasible disk radii concentrate just outside
the hole boundary, inside the scaled annulus, so the depletion z-score is
strongly negative. The asymptotic avoidance regime is far beyond feasible
simulation radii; the assertion is kept at its stated form on purpose and
the failure message carries the measured values.
"""

import math

import numpy as np
import yaml
from scipy.integrate import dblquad, quad
from scipy.stats import chi2

from gaflab import gaf, mc, measures, polydensity, special, varopt
from gaflab.cli import cmd_simulate
from gaflab.special import WeightModel

BETAS = (0.5, 1.0, 2.0, 3.0)


def _report(name, detail):
    print(f"criterion {name}: {detail}")


# --------------------------------------------------------------------------- 1


def test_criterion_01_coefficient_orthonormality():
    worst = 0.0
    for beta in BETAS:
        model = WeightModel(beta=beta)
        for n in range(21):
            lc = float(gaf.log_coefficient(n, model))
            r_peak = ((2.0 * n + 1.0) / beta) ** (1.0 / beta)

            def g(r):
                return (2.0 * n + 1.0) * math.log(r) - r**beta

            shift = g(r_peak) + 2.0 * lc + math.log(beta)
            # find where the integrand has fallen 250 nats below its peak
            rs = np.geomspace(r_peak * 1e-3, r_peak * 200.0, 4000)
            logvals = (2.0 * n + 1.0) * np.log(rs) - rs**beta
            above = rs[logvals - g(r_peak) > -250.0]
            r_hi = float(above[-1]) * 1.5

            val, _ = quad(
                lambda r: math.exp(g(r) + 2.0 * lc + math.log(beta) - shift),
                0.0,
                r_hi,
                points=[r_peak],
                limit=500,
                epsabs=0.0,
                epsrel=1e-12,
            )
            total = val * math.exp(shift)
            worst = max(worst, abs(total - 1.0))
    _report("01", f"orthonormality worst gap {worst:.3e} over n <= 20, beta in {BETAS}")
    assert worst < 1e-8


# --------------------------------------------------------------------------- 2


def test_criterion_02_stirling_bracket_containment():
    frozen = {0.5: 13, 1.0: 5, 2.0: 1, 3.0: 1, 4.0: 1}
    for beta, want in frozen.items():
        model = WeightModel(beta=beta)
        k0 = special.stirling_threshold(model)
        assert k0 == want
        assert k0 <= 50
        ks = np.arange(k0, 100_001)
        target = special.log_gamma(2.0 * (ks + 1) / beta)
        lo, hi = special.stirling_bounds(ks, model)
        assert np.all(lo <= target), f"lower bound fails for beta {beta}"
        assert np.all(target <= hi), f"upper bound fails for beta {beta}"
    _report("02", f"brackets contain log-gamma from thresholds {frozen} up to 1e5")


# --------------------------------------------------------------------------- 3


def test_criterion_03_closed_potential_vs_quadrature():
    worst = 0.0
    combos = 0
    for alpha in (10.0, 30.0, 100.0):
        for beta in BETAS:
            model = WeightModel(beta=beta)
            for p in (0.0, 0.5, 2.0, 4.0):
                mu = measures.minimizer_measure(alpha, model, p)
                xs = np.linspace(0.0, 1.5 * alpha ** (1.0 / beta), 200)
                gap = np.max(
                    np.abs(
                        measures.potential_closed(mu, alpha, model, p, xs)
                        - measures.potential_quadrature(mu, xs)
                    )
                )
                worst = max(worst, float(gap))
                combos += 1
    _report("03", f"max |closed - quadrature| = {worst:.3e} over {combos} combos")
    assert combos >= 20
    assert worst <= 1e-10


# --------------------------------------------------------------------------- 4


def test_criterion_04_equilibrium_conditions():
    worst_dev = worst_max = 0.0
    for alpha in (10.0, 100.0):
        for beta in BETAS:
            model = WeightModel(beta=beta)
            for p in (0.0, 0.5, 2.0, 4.0):
                mu = measures.minimizer_measure(alpha, model, p)
                rep = measures.equilibrium_report(mu, alpha, model, p)
                worst_dev = max(worst_dev, rep.g_support_dev)
                worst_max = max(worst_max, rep.g_max)
    # case 1 value of g on the unit circle
    worst_gap1 = 0.0
    for alpha in (10.0, 100.0):
        for beta in (1.0, 2.0):
            model = WeightModel(beta=beta)
            p = 0.5
            mu = measures.minimizer_measure(alpha, model, p)
            rep = measures.equilibrium_report(mu, alpha, model, p)
            g1 = (
                measures.potential_quadrature(mu, 1.0)
                - 1.0 / (beta * alpha)
                - 0.5 * rep.b_value
            )
            want = (p - 1.0 - p * math.log(p)) / (beta * alpha)
            worst_gap1 = max(worst_gap1, abs(g1 - want))
    _report(
        "04",
        f"g on support <= {worst_dev:.3e}, g globally <= {worst_max:.3e}, "
        f"unit-circle value gap {worst_gap1:.3e}",
    )
    assert worst_dev <= 1e-9
    assert worst_max <= 1e-9
    assert worst_gap1 <= 1e-10


# --------------------------------------------------------------------------- 5


def test_criterion_05_energy_identity():
    worst = 0.0
    for alpha in (10.0, 100.0):
        for beta in BETAS:
            model = WeightModel(beta=beta)
            for p in (0.0, 0.4, 1.7, 3.0):
                mu = measures.minimizer_measure(alpha, model, p)
                i_val = measures.b_functional(mu, alpha, model) - measures.log_energy(mu)
                want = (math.log(alpha) - 1.5) / beta + 2.0 * measures.z_of_p(p) / (
                    beta * alpha**2
                )
                worst = max(worst, abs(i_val - want))
    _report("05", f"energy identity worst gap {worst:.3e} over 32 combos")
    assert worst <= 1e-8


# --------------------------------------------------------------------------- 6


def test_criterion_06_variational_recovery():
    rows = []
    for alpha in (10.0, 100.0):
        for beta in (1.0, 2.0):
            model = WeightModel(beta=beta)
            for p in (0.0, 0.5, 2.0):
                constraint = varopt.CONSTRAINT_LE if p < 1.0 else varopt.CONSTRAINT_GE
                res = varopt.minimize_constrained(alpha, model, p, constraint, grid_size=400)
                closed = (math.log(alpha) - 1.5) / beta + 2.0 * measures.z_of_p(p) / (
                    beta * alpha**2
                )
                band = varopt.forbidden_band_mass(res.measure, p)
                rows.append((alpha, beta, p, res.objective - closed, band))
    worst_gap = max(abs(r[3]) for r in rows)
    worst_band = max(r[4] for r in rows)
    _report("06", f"solver gap <= {worst_gap:.2e}, band mass <= {worst_band:.2e}, 12 combos")
    for alpha, beta, p, gap, band in rows:
        assert abs(gap) <= 5e-3, (alpha, beta, p, gap)
        assert band < 1e-3, (alpha, beta, p, band)


# --------------------------------------------------------------------------- 7


def _degree_one_density(z):
    return (1.0 / math.pi) * (1.0 + abs(z) ** 2) ** (-2.0)


def test_criterion_07_degree_one_density_and_degree_two_marginal():
    model = WeightModel(beta=2.0)
    params1 = polydensity.make_density_params(1, 1.0, model)

    # pointwise closed form at N = 1
    worst_pt = 0.0
    for x in np.linspace(-3.0, 3.0, 25):
        for y in np.linspace(-3.0, 3.0, 25):
            z = complex(x, y)
            if abs(z) > 3.0:
                continue
            got = polydensity.joint_density([z], params1)
            worst_pt = max(worst_pt, abs(got - _degree_one_density(z)))
    assert worst_pt <= 1e-12

    # histogram of one million sampled zeros: the degree-1 zero is the ratio
    # of two independent standard complex gaussians
    n_trials = 1_000_000
    xi = gaf.standard_complex_gaussians(2 * n_trials, 20240801, 0).reshape(n_trials, 2)
    zsamples = -xi[:, 0] / xi[:, 1]
    edges = np.linspace(-3.0, 3.0, 31)
    counts, _, _ = np.histogram2d(zsamples.real, zsamples.imag, bins=(edges, edges))
    centers = 0.5 * (edges[:-1] + edges[1:])
    cell_area = (edges[1] - edges[0]) ** 2
    worst_hist = 0.0
    for i, cx in enumerate(centers):
        for j, cy in enumerate(centers):
            if math.hypot(cx, cy) > 3.0:
                continue
            emp = counts[i, j] / (n_trials * cell_area)
            worst_hist = max(worst_hist, abs(emp - _degree_one_density(complex(cx, cy))))
    assert worst_hist <= 0.02

    # degree-2 radial marginal: chi-square against the expected-count route
    n2 = 100_000
    seed = 20240802
    xi2 = gaf.standard_complex_gaussians(3 * n2, seed, 0).reshape(n2, 3)
    a_coef = np.exp([float(gaf.log_coefficient(k, model)) for k in range(3)])
    c = xi2 * a_coef
    disc = np.sqrt(c[:, 1] ** 2 - 4.0 * c[:, 2] * c[:, 0])
    roots = np.stack([(-c[:, 1] + disc), (-c[:, 1] - disc)], axis=1) / (2.0 * c[:, 2])[:, None]
    pick = np.random.Generator(np.random.Philox(key=np.array([seed, 1], dtype=np.uint64)))
    radius = np.abs(roots[np.arange(n2), pick.integers(0, 2, n2)])

    bin_edges = np.linspace(0.0, 3.0, 31)
    cum = np.array([gaf.expected_count(model, 2, t) if t > 0 else 0.0 for t in bin_edges])
    probs = np.diff(cum) / 2.0
    probs = np.append(probs, 1.0 - cum[-1] / 2.0)
    observed = np.histogram(radius, bins=bin_edges)[0].astype(float)
    observed = np.append(observed, n2 - observed.sum())
    expected = n2 * probs
    stat = float(np.sum((observed - expected) ** 2 / expected))
    crit = chi2.ppf(0.99, len(probs) - 1)

    # dual route: the same bin masses from the joint density itself. The
    # pair density integrates to N(N-1) = 2, so marginalizing one coordinate
    # over the plane leaves the one-point intensity and the bin integral
    # equals the expected-count increment. One root tends to escape far out
    # when the leading coefficient is small, so the plane integral is split
    # at a finite radius and the heavy 1/|z|^4 tail handled by inversion.
    params2 = polydensity.make_density_params(2, 1.0, model)
    r_split = 8.0

    def marginal_radial(r1):
        z1 = complex(r1, 0.0)

        def inner(theta, r2):
            z2 = r2 * complex(math.cos(theta), math.sin(theta))
            return polydensity.joint_density([z1, z2], params2) * r2

        def inner_far(theta, u):
            r2 = 1.0 / u
            z2 = r2 * complex(math.cos(theta), math.sin(theta))
            return polydensity.joint_density([z1, z2], params2) * r2 / u**2

        near, _ = dblquad(inner, 0.0, r_split, 0.0, 2.0 * math.pi, epsabs=1e-12, epsrel=1e-10)
        far, _ = dblquad(
            inner_far, 1e-12, 1.0 / r_split, 0.0, 2.0 * math.pi, epsabs=1e-12, epsrel=1e-10
        )
        return 2.0 * math.pi * r1 * (near + far)

    worst_bin_gap = 0.0
    for i in (3, 10, 20):
        direct, _ = quad(marginal_radial, bin_edges[i], bin_edges[i + 1], limit=60)
        worst_bin_gap = max(worst_bin_gap, abs(direct - (cum[i + 1] - cum[i])))
    _report(
        "07",
        f"pointwise {worst_pt:.1e}, histogram sup-gap {worst_hist:.4f}, "
        f"chi2 {stat:.1f} vs {crit:.1f}, marginal-route gap {worst_bin_gap:.1e}",
    )
    assert worst_bin_gap <= 1e-5
    assert stat < crit


# --------------------------------------------------------------------------- 8


def test_criterion_08_norm_dominates_sup_functional():
    model = WeightModel(beta=2.0)
    rng = np.random.Generator(np.random.Philox(key=np.array([88, 0], dtype=np.uint64)))
    worst = math.inf
    for n in (2, 5, 20, 50):
        params = polydensity.make_density_params(n, 1.0, model)
        for _ in range(500):
            scale = math.exp(rng.uniform(math.log(0.2), math.log(2.0 * math.sqrt(n))))
            z = scale * (rng.normal(size=n) + 1j * rng.normal(size=n)) / math.sqrt(2.0)
            s_val = polydensity.s_functional(z, params)
            a_val = polydensity.a_functional(z, params)
            margin = s_val - (a_val - 1.5 * math.log(n))
            worst = min(worst, margin)
            assert margin >= -1e-12, (n, margin)
    _report("08", f"log S - (log A - 1.5 log N) >= {worst:.4f} over 2000 configurations")


# --------------------------------------------------------------------------- 9


def test_criterion_09_dominant_monomial_inclusion():
    model = WeightModel(beta=2.0)
    total_events = 0
    for r in (0.3, 0.6, 1.0):
        out = mc.dominant_monomial_probability(model, r, 0.0, 10_000, 424242)
        assert out["n_violations"] == 0, (r, out)
        assert out["n_checked"] == out["n_event"]
        total_events += out["n_event"]
    _report("09", f"zero violations over 30000 trials, {total_events} events checked")
    assert total_events > 0


# -------------------------------------------------------------------------- 10


def test_criterion_10_tail_bound_never_exceeded():
    exceed = 0
    worst_ratio = 0.0
    for beta in (1.0, 2.0):
        model = WeightModel(beta=beta)
        plan = special.make_truncation_plan(1.5, model, alpha=4.0**beta * math.e)
        bound = math.exp(gaf.tail_bound(plan, model))
        n_lo = plan.n_trunc + 1
        n_hi = plan.n_trunc + 600
        theta = np.linspace(0.0, 2.0 * math.pi, 16, endpoint=False)
        radii = np.linspace(0.05, plan.big_b * plan.r, 12)
        grid = (radii[:, None] * np.exp(1j * theta[None, :])).ravel()
        for t in range(1000):
            xi = gaf.standard_complex_gaussians(n_hi + 1, 515151, t)
            tail = gaf.evaluate_range(xi[n_lo:], model, grid, n_lo)
            m = float(np.max(np.abs(tail)))
            worst_ratio = max(worst_ratio, m / bound)
            if m > bound:
                exceed += 1
    _report("10", f"exceedances {exceed}, worst |T|/bound = {worst_ratio:.3e}, 1000 trials")
    assert exceed == 0


# -------------------------------------------------------------------------- 11


def test_criterion_11_hole_trend_and_depletion_direction():
    model = WeightModel(beta=2.0)
    radii = (0.8, 1.0, 1.2)
    results = {}
    for r in radii:
        plan = mc.make_hole_plan(model, r)
        exp = mc.estimate_hole_probability(model, plan, r, 100_000, 90210)
        results[r] = (exp, mc.depletion_statistic(exp))
    summary = "; ".join(
        f"r={r}: p_hat={results[r][0].p_hat:.4f} "
        f"ci=({results[r][0].ci95[0]:.4f},{results[r][0].ci95[1]:.4f}) "
        f"z={results[r][1].zscore:+.1f}"
        for r in radii
    )
    _report("11", summary)
    # hole probabilities fall with radius, beyond CI overlap
    assert results[1.0][0].ci95[1] < results[0.8][0].ci95[0], summary
    assert results[1.2][0].ci95[1] < results[1.0][0].ci95[0], summary
    # stated depletion direction: positive and increasing z-scores
    zs = [results[r][1].zscore for r in radii]
    assert zs[0] > 0 and zs[1] > zs[0] and zs[2] > zs[1], (
        "depletion z-scores are not positive increasing: "
        f"{list(zip(radii, zs))}; full data: {summary}"
    )


# -------------------------------------------------------------------------- 12


def test_criterion_12_simulate_determinism_across_threads():
    base_hole = {"beta": 2.0, "r": 0.8, "trials": 600, "seed": 7}
    recs = [
        cmd_simulate("hole", {**base_hole, "threads": t}) for t in (1, 4)
    ]
    payloads = [yaml.safe_dump(r["results"], sort_keys=False) for r in recs]
    assert payloads[0] == payloads[1]

    base_dom = {"beta": 2.0, "r": 0.5, "p": 0.0, "trials": 300, "seed": 7}
    recs_d = [
        cmd_simulate("dominant", {**base_dom, "threads": t}) for t in (1, 4)
    ]
    payloads_d = [yaml.safe_dump(r["results"], sort_keys=False) for r in recs_d]
    assert payloads_d[0] == payloads_d[1]
    _report("12", "hole and dominant result payloads byte-identical across threads")
