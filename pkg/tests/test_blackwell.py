from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import dynkin_value
from stochorder.blackwell import (
    blackwell_dominates,
    bounded_drift_family,
    cell_martingale_family,
    composition_closure_check,
    consistency_check,
    constrained_design,
    constrained_envelope,
    constrained_vs_kg,
    identity_family,
    martingale_family,
    phi_membership,
    privacy_cone,
    privacy_family,
    psi,
    stopping_family,
)
from stochorder.cones import CONCAVE, CONVEX, NONDECREASING, NONINCREASING
from stochorder.measure import Measure, dirac, random_kernel, simplex_grid, uniform_line_grid


@pytest.mark.parametrize("cone", [NONDECREASING, NONINCREASING, CONVEX])
def test_max_closed_cones_are_consistent_with_their_transitions(cone):
    g = uniform_line_grid(5)
    rep = consistency_check(cone, psi(cone, g))
    assert rep.consistent
    assert all(v == 0 for v in rep.residuals.values())


def test_convex_cone_matches_martingales():
    g = uniform_line_grid(5)
    assert consistency_check(CONVEX, martingale_family(g)).consistent


def test_concave_cone_is_not_consistent():
    g = uniform_line_grid(5)
    rep = consistency_check(CONCAVE, martingale_family(g))
    assert not rep.consistent
    assert not rep.max_closed.max_closed


def test_privacy_pair_is_consistent():
    g = simplex_grid(3, 3)
    rep = consistency_check(privacy_cone(g, 0), privacy_family(g, 0))
    assert rep.consistent


def test_exact_consistency():
    g = uniform_line_grid(4)
    rep = consistency_check(NONDECREASING, psi(NONDECREASING, g, exact=True), exact=True)
    assert rep.consistent and rep.exact


def test_bounded_drift_is_not_closed_under_composition():
    g = uniform_line_grid(5)
    closed, witness = composition_closure_check(bounded_drift_family(g, 0.25))
    assert not closed
    x, row = witness
    t = g.points[:, 0]
    assert abs(row @ t - t[x]) > 0.25


def test_martingale_and_identity_are_closed():
    g = uniform_line_grid(5)
    assert composition_closure_check(martingale_family(g))[0]
    assert composition_closure_check(identity_family(g))[0]


def test_phi_membership():
    g = uniform_line_grid(5)
    t = g.points[:, 0]
    fam = martingale_family(g)
    assert phi_membership(t ** 2, fam).member
    rep = phi_membership(-(t ** 2), fam)
    assert not rep.member and rep.witness not in (0, 4)


def test_privacy_design_value():
    # protected coordinate stays at 0.4; the rest is concavified along x2 in [0, 0.6]
    g = simplex_grid(3, 10)
    P = g.points
    f = (P[:, 2] >= P[:, 0]).astype(float)
    prior = int(np.argmin(np.abs(P - [0.4, 0.3, 0.3]).sum(axis=1)))
    rep = constrained_design(f, prior, privacy_family(g, 0))
    assert abs(rep.value - 0.75) < 1e-9
    assert rep.composition_closed
    assert np.allclose(rep.nu.weights @ P, [0.4, 0.3, 0.3])
    assert all(abs(p[0] - 0.4) < 1e-12 for p in P[rep.nu.support(1e-12)])


ISOLATED = [[2], [0, 1, 3, 4, 5, 6, 7, 8, 9, 10]]


def test_isolated_cell_blocks_the_unconstrained_optimum():
    g = uniform_line_grid(11)
    f = np.zeros(11)
    f[2], f[6], f[10] = 1, 2, 2.2
    fam = cell_martingale_family(g, ISOLATED)
    rep = constrained_vs_kg(f, 4, fam)
    # unconstrained: split between 0.2 and 0.6; constrained: 0.2 is out of reach
    assert np.allclose(rep.kg.weights[[2, 6]], [0.5, 0.5])
    assert np.allclose(rep.constrained.weights[[0, 6]], [1 / 3, 2 / 3])
    assert rep.constrained_dominates_kg and not rep.strictly_dominated
    assert rep.dichotomy_holds
    exact = constrained_design(f, 4, cell_martingale_family(g, ISOLATED, exact=True), exact=True)
    assert exact.value == Fraction(4, 3)


def test_blackwell_dominance():
    g = uniform_line_grid(3)
    spread = Measure(g, [0.5, 0, 0.5])
    assert blackwell_dominates(spread, dirac(g, 1))
    assert not blackwell_dominates(dirac(g, 1), spread)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000))
def test_stopping_family_reproduces_optimal_stopping(seed):
    rng = np.random.default_rng(seed)
    g = uniform_line_grid(5)
    Q = random_kernel(g, rng)
    f = rng.normal(size=5)
    fhat, _, _, converged = constrained_envelope(f, stopping_family(Q), depth=2000, tol=1e-13)
    assert converged
    assert np.allclose(fhat, dynkin_value(f, Q.rows), atol=1e-6)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000))
def test_design_value_is_between_prior_and_kg(seed):
    rng = np.random.default_rng(seed)
    g = uniform_line_grid(6)
    f = rng.normal(size=6)
    x = int(rng.integers(6))
    fam = cell_martingale_family(g, [[0, 1, 2], [3, 4, 5]])
    rep = constrained_design(f, x, fam)
    full = constrained_design(f, x, martingale_family(g))
    assert f[x] - 1e-12 <= rep.value <= full.value + 1e-9
    assert rep.certificate["value_matches"]
