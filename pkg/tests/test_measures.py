"""Conjugate levels, radial measures, potentials, energies, equilibrium checks."""

import math

import numpy as np
import pytest

from gaflab.errors import (
    DomainError,
    EmptyBulkError,
    ParameterError,
    SingularParameterError,
    UnsupportedRegimeError,
)
from gaflab.measures import (
    RadialMeasure,
    b_functional,
    equilibrium_report,
    hole_params,
    limiting_measure,
    log_energy,
    minimizer_measure,
    potential_closed,
    potential_quadrature,
    q_of_p,
    z_of_p,
)
from tests.test_oracles import Q_HALF, Q_TWO, Z_HALF, Z_THREE, Z_TWO, Z_ZERO


# ------------------------------------------------------------- scalar maps

def test_conjugate_level_frozen_values():
    assert q_of_p(0.0) == math.e
    assert abs(q_of_p(0.5) - Q_HALF) < 1e-14
    assert abs(q_of_p(2.0) - Q_TWO) < 1e-14
    assert q_of_p(math.e) == 0.0
    assert q_of_p(5.0) == 0.0


def test_conjugate_level_involution():
    for p in [0.1 * k for k in range(1, 10)] + [1.1, 1.5, 2.0, 2.5]:
        assert abs(q_of_p(q_of_p(p)) - p) < 1e-10, f"involution breaks at p = {p}"


def test_conjugate_level_defining_equation():
    for p in (0.05, 0.4, 0.85, 1.2, 1.9, 2.6):
        q = q_of_p(p)
        assert abs(q * (math.log(q) - 1.0) - p * (math.log(p) - 1.0)) < 1e-12
        assert abs(q - p) > 1e-3  # the conjugate is the other root


def test_scalar_map_errors():
    with pytest.raises(SingularParameterError):
        q_of_p(1.0)
    with pytest.raises(SingularParameterError):
        z_of_p(1.0)
    with pytest.raises(DomainError):
        q_of_p(-0.1)
    with pytest.raises(DomainError):
        z_of_p(-2.0)


def test_rate_constant_frozen_values():
    assert abs(z_of_p(0.0) - Z_ZERO) < 1e-14
    assert abs(z_of_p(0.5) - Z_HALF) < 1e-14
    assert abs(z_of_p(2.0) - Z_TWO) < 1e-14
    assert abs(z_of_p(3.0) - Z_THREE) < 1e-13


def test_rate_constant_symmetry_under_conjugation():
    for p in (0.1, 0.25, 0.5, 0.75, 0.95):
        assert abs(z_of_p(p) - z_of_p(q_of_p(p))) < 1e-10


def test_rate_constant_vanishes_toward_one():
    # Z_p -> 0 as p -> 1 from both sides
    assert z_of_p(0.999) < 1e-5
    assert z_of_p(1.001) < 1e-5
    assert z_of_p(0.9) < z_of_p(0.5) < z_of_p(0.0)


def test_hole_params_regimes():
    assert hole_params(0.0).regime == "p_eq_0"
    assert hole_params(0.5).regime == "p_lt_1"
    assert hole_params(2.0).regime == "p_in_1_e"
    assert hole_params(3.0).regime == "p_ge_e"
    hp = hole_params(0.5)
    assert hp.p == 0.5 and abs(hp.q - Q_HALF) < 1e-14 and abs(hp.z_p - Z_HALF) < 1e-14


# ------------------------------------------------------------ measure type

def test_radial_measure_validation():
    with pytest.raises(ParameterError):
        RadialMeasure(circle_atoms=((0.0, 1.0),), annulus_pieces=(), beta=2.0)
    with pytest.raises(ParameterError):
        RadialMeasure(circle_atoms=((1.0, -0.5),), annulus_pieces=(), beta=2.0)
    with pytest.raises(ParameterError):
        RadialMeasure(circle_atoms=(), annulus_pieces=((2.0, 1.0, 1.0),), beta=2.0)
    with pytest.raises(ParameterError):
        RadialMeasure(
            circle_atoms=(), annulus_pieces=((0.0, 2.0, 1.0), (1.0, 3.0, 1.0)), beta=2.0
        )
    with pytest.raises(DomainError):
        RadialMeasure(circle_atoms=(), annulus_pieces=(), beta=-1.0)


def test_radial_measure_mass_arithmetic():
    mu = RadialMeasure(
        circle_atoms=((1.0, 0.25),),
        annulus_pieces=((0.0, 1.0, 0.5), (2.0, 3.0, 0.1)),
        beta=2.0,
    )
    want = 0.25 + 0.5 * 1.0 + 0.1 * (9.0 - 4.0)
    assert abs(mu.total_mass() - want) < 1e-14
    assert mu.bounded


ALPHAS = (10.0, 100.0)
BETAS = (0.5, 1.0, 2.0, 3.0)
LEVELS = (0.0, 0.5, 2.0, 4.0)  # one per regime plus the p = 0 corner


def test_minimizer_measure_is_probability(models):
    for alpha in ALPHAS:
        for b in BETAS:
            for p in LEVELS:
                mu = minimizer_measure(alpha, models[b], p)
                assert abs(mu.total_mass() - 1.0) < 1e-12, (alpha, b, p)


def test_minimizer_measure_structure(models):
    model = models[2.0]
    # p < 1: atom (q-p)/alpha, bulk split at p^(1/2) and q^(1/2)
    mu = minimizer_measure(10.0, model, 0.5)
    q = q_of_p(0.5)
    assert mu.circle_atoms == ((1.0, pytest.approx((q - 0.5) / 10.0, abs=1e-15)),)
    (a1, b1, c1), (a2, b2, c2) = mu.annulus_pieces
    assert (a1, c1) == (0.0, 0.1) and abs(b1 - math.sqrt(0.5)) < 1e-15
    assert abs(a2 - math.sqrt(q)) < 1e-15 and abs(b2 - math.sqrt(10.0)) < 1e-12
    # 1 < p < e: roles swap
    mu2 = minimizer_measure(10.0, model, 2.0)
    q2 = q_of_p(2.0)
    assert abs(mu2.circle_atoms[0][1] - (2.0 - q2) / 10.0) < 1e-15
    assert abs(mu2.annulus_pieces[0][1] - math.sqrt(q2)) < 1e-15
    assert abs(mu2.annulus_pieces[1][0] - math.sqrt(2.0)) < 1e-15
    # p >= e: no inner bulk, atom mass p/alpha
    mu3 = minimizer_measure(10.0, model, 4.0)
    assert len(mu3.annulus_pieces) == 1
    assert abs(mu3.circle_atoms[0][1] - 0.4) < 1e-15
    assert abs(mu3.annulus_pieces[0][0] - 2.0) < 1e-15


def test_minimizer_measure_errors(model2):
    with pytest.raises(SingularParameterError):
        minimizer_measure(10.0, model2, 1.0)
    with pytest.raises(ParameterError):
        minimizer_measure(2.0, model2, 0.0)  # alpha must exceed e
    with pytest.raises(EmptyBulkError):
        minimizer_measure(10.0, model2, 10.0)
    with pytest.raises(DomainError):
        minimizer_measure(10.0, model2, -1.0)


def test_limiting_measure_shape(model2):
    mu = limiting_measure(model2, 0.5)
    assert not mu.bounded
    assert mu.total_mass() == math.inf
    q = q_of_p(0.5)
    assert abs(mu.circle_atoms[0][1] - (q - 0.5)) < 1e-14  # beta/2 * (q - p)
    assert mu.annulus_pieces[-1][1] == math.inf
    with pytest.raises(UnsupportedRegimeError):
        limiting_measure(model2, 1.5)
    with pytest.raises(UnsupportedRegimeError):
        limiting_measure(model2, 1.0)


# -------------------------------------------------------------- potentials

def test_potential_of_unit_circle_atom():
    mu = RadialMeasure(circle_atoms=((1.0, 1.0),), annulus_pieces=(), beta=2.0)
    assert potential_quadrature(mu, 0.5) == 0.0
    assert abs(potential_quadrature(mu, 2.0) - math.log(2.0)) < 1e-15
    assert potential_quadrature(mu, 1.0) == 0.0


def test_potential_of_scaled_base_disk(model2):
    # density (beta/2pi) t^(beta-1), scaled by 1/alpha, out to alpha^(1/beta):
    # the potential at the origin is (ln alpha - 1)/beta
    alpha = 10.0
    mu = RadialMeasure(
        circle_atoms=(), annulus_pieces=((0.0, math.sqrt(alpha), 1.0 / alpha),), beta=2.0
    )
    want = (math.log(alpha) - 1.0) / 2.0
    assert abs(potential_quadrature(mu, 0.0) - want) < 1e-14


def test_potential_closed_matches_quadrature_subset(models):
    for b in (1.0, 2.0):
        model = models[b]
        for p in LEVELS:
            mu = minimizer_measure(10.0, model, p)
            xs = np.linspace(0.0, 1.5 * 10.0 ** (1.0 / b), 200)
            closed = potential_closed(mu, 10.0, model, p, xs)
            oracle = potential_quadrature(mu, xs)
            assert np.max(np.abs(closed - oracle)) < 1e-10, (b, p)


def test_potential_beyond_edge_is_plain_log(model2):
    mu = minimizer_measure(10.0, model2, 0.0)
    x = 2.0 * math.sqrt(10.0)
    assert abs(potential_closed(mu, 10.0, model2, 0.0, x) - math.log(x)) < 1e-12
    assert abs(potential_quadrature(mu, x) - math.log(x)) < 1e-12


def test_potential_argument_validation(model2):
    mu = minimizer_measure(10.0, model2, 0.0)
    with pytest.raises(DomainError):
        potential_quadrature(mu, -1.0)
    with pytest.raises(DomainError):
        potential_closed(mu, 10.0, model2, 0.0, np.array([0.5, -0.5]))
    lim = limiting_measure(model2, 0.0)
    with pytest.raises(ParameterError):
        potential_quadrature(lim, 1.0)  # unbounded: needs truncation_radius
    val = potential_quadrature(lim, 1.0, truncation_radius=5.0)
    assert math.isfinite(val)


# ----------------------------------------------------------------- energies

def test_b_functional_of_minimizer(models):
    for b in (1.0, 2.0, 3.0):
        model = models[b]
        for p in (0.0, 0.5, 2.0):
            mu = minimizer_measure(10.0, model, p)
            want = (2.0 / b) * (math.log(10.0) - 1.0)
            assert abs(b_functional(mu, 10.0, model) - want) < 1e-9, (b, p)


def test_b_functional_sup_not_beyond_edge(model2):
    # the sup restricted to [0, alpha^(1/beta)] dominates far-out probes
    alpha = 10.0
    mu = minimizer_measure(alpha, model2, 0.5)
    half_b = 0.5 * b_functional(mu, alpha, model2)
    for x in np.array([1.1, 1.5, 3.0]) * math.sqrt(alpha):
        outside = potential_quadrature(mu, float(x)) - float(x) ** 2 / (2.0 * alpha)
        assert outside <= half_b + 1e-12


def test_log_energy_trivial_cases():
    unit = RadialMeasure(circle_atoms=((1.0, 1.0),), annulus_pieces=(), beta=2.0)
    assert log_energy(unit) == 0.0
    two = RadialMeasure(circle_atoms=((2.0, 1.0),), annulus_pieces=(), beta=2.0)
    assert abs(log_energy(two) - math.log(2.0)) < 1e-15


def test_log_energy_merges_coincident_atoms():
    split = RadialMeasure(
        circle_atoms=((1.5, 0.3), (1.5, 0.7)), annulus_pieces=(), beta=2.0
    )
    merged = RadialMeasure(circle_atoms=((1.5, 1.0),), annulus_pieces=(), beta=2.0)
    assert abs(log_energy(split) - log_energy(merged)) < 1e-14


def test_log_energy_rejects_unbounded(model2):
    with pytest.raises(ParameterError):
        log_energy(limiting_measure(model2, 0.0))


def test_energy_identity_subset(models):
    # I(mu) = (ln alpha - 3/2)/beta + 2 Z_p/(beta alpha^2); the full grid
    # runs in the acceptance suite
    for alpha, b, p in ((10.0, 2.0, 0.0), (100.0, 1.0, 0.5), (10.0, 3.0, 4.0)):
        model = models[b]
        mu = minimizer_measure(alpha, model, p)
        i_val = b_functional(mu, alpha, model) - log_energy(mu)
        want = (math.log(alpha) - 1.5) / b + 2.0 * z_of_p(p) / (b * alpha**2)
        assert abs(i_val - want) < 1e-8, (alpha, b, p)


def test_equilibrium_report_case_one(models):
    for b in (1.0, 2.0):
        model = models[b]
        alpha, p = 10.0, 0.5
        rep = equilibrium_report(minimizer_measure(alpha, model, p), alpha, model, p)
        g_at_1 = (
            potential_quadrature(minimizer_measure(alpha, model, p), 1.0)
            - 1.0 / (b * alpha)
            - 0.5 * rep.b_value
        )
        want = (p - 1.0 - p * math.log(p)) / (b * alpha)
        assert abs(g_at_1 - want) < 1e-10
        assert rep.g_support_dev <= 1e-9
        assert rep.g_max <= 1e-9
        assert abs(rep.i_value - (rep.b_value - rep.sigma_value)) < 1e-15


def test_equilibrium_report_p_zero_gap_height(model2):
    # at p = 0 the unit-circle value of g reduces to -1/(beta alpha)
    alpha = 20.0
    mu = minimizer_measure(alpha, model2, 0.0)
    rep = equilibrium_report(mu, alpha, model2, 0.0)
    g_at_1 = potential_quadrature(mu, 1.0) - 1.0 / (2.0 * alpha) - 0.5 * rep.b_value
    assert abs(g_at_1 - (-1.0 / (2.0 * alpha))) < 1e-10


def test_equilibrium_report_requires_probability(model2):
    lopsided = RadialMeasure(circle_atoms=((1.0, 0.5),), annulus_pieces=(), beta=2.0)
    with pytest.raises(ParameterError):
        equilibrium_report(lopsided, 10.0, model2, 0.0)


def test_minimality_against_random_perturbations(model2):
    # competing measures built by bleeding mass from the minimizer into a
    # random feasible atom never beat it: I(nu) >= I(mu) - 1e-10
    alpha, p = 10.0, 0.5
    model = model2
    mu = minimizer_measure(alpha, model, p)
    i_mu = (math.log(alpha) - 1.5) / 2.0 + 2.0 * z_of_p(p) / (2.0 * alpha**2)
    rng = np.random.Generator(np.random.Philox(key=np.array([77, 0], dtype=np.uint64)))
    x_edge = math.sqrt(alpha)
    for trial in range(100):
        eps = 0.02 + 0.28 * rng.random()
        rho = 1.0 + (x_edge - 1.0) * rng.random()  # at or outside the unit circle
        atoms = [(r, (1.0 - eps) * m) for r, m in mu.circle_atoms]
        atoms.append((rho, eps))
        pieces = [(a, bb, (1.0 - eps) * c) for a, bb, c in mu.annulus_pieces]
        nu = RadialMeasure(circle_atoms=tuple(atoms), annulus_pieces=tuple(pieces), beta=2.0)
        assert abs(nu.total_mass() - 1.0) < 1e-12
        i_nu = b_functional(nu, alpha, model, grid_size=800) - log_energy(nu)
        assert i_nu >= i_mu - 1e-10, f"trial {trial}: I(nu) = {i_nu} < I(mu) = {i_mu}"
