import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stochorder.cones import CONCAVE, CONVEX, NONDECREASING, dirac_orbit
from stochorder.coupling import (
    lsd_exposed_construct,
    mps_exposed_construct,
    orbit_extreme_test,
    strassen_coupling,
    unique_rationalization_check,
)
from stochorder.errors import NotExposable
from stochorder.measure import Grid, Measure, dirac, line_grid, push, random_measure, simplex_grid, uniform, uniform_line_grid
from stochorder.optimize import solve_primal, unique_optimizer_check


def test_forced_split_is_found():
    g = uniform_line_grid(3)
    res = strassen_coupling(dirac(g, 1), Measure(g, [0.5, 0, 0.5]), CONCAVE)
    assert res.found
    assert np.allclose(res.kernel.rows[1], [0.5, 0, 0.5])


def test_reverse_direction_has_separating_function():
    g = uniform_line_grid(3)
    res = strassen_coupling(Measure(g, [0.5, 0, 0.5]), dirac(g, 1), CONVEX)
    assert not res.found and res.margin > 0


@settings(max_examples=25, deadline=None)
@given(st.integers(3, 6), st.integers(0, 10_000))
def test_coupling_rows_stay_in_orbits(n, seed):
    rng = np.random.default_rng(seed)
    g = uniform_line_grid(n)
    mu = random_measure(g, rng)
    for cone in (CONCAVE, NONDECREASING):
        nu = solve_primal(rng.normal(size=n), mu, cone).optimizer
        res = strassen_coupling(mu, nu, cone)
        assert res.found
        assert push(res.kernel, mu).close_to(nu, 1e-8)
        for x in mu.support(1e-12):
            assert dirac_orbit(cone, g, x).contains(res.kernel.rows[x], 1e-7)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_failed_coupling_margin_certifies(seed):
    rng = np.random.default_rng(seed)
    g = uniform_line_grid(5)
    mu, nu = random_measure(g, rng), random_measure(g, rng)
    res = strassen_coupling(mu, nu, NONDECREASING)
    if not res.found:
        assert res.margin > 0


def test_unique_rationalization():
    g = uniform_line_grid(3)
    assert unique_rationalization_check(dirac(g, 1), Measure(g, [0.5, 0, 0.5]), CONCAVE).unique
    # both source atoms can reach the middle: plans are not unique
    rep = unique_rationalization_check(Measure(g, [0, 0.5, 0.5]), Measure(g, [0.25, 0.5, 0.25]), NONDECREASING)
    assert not rep.unique


def test_extreme_test_routes():
    g = uniform_line_grid(5)
    mu = dirac(g, 2)
    assert orbit_extreme_test(Measure(g, [0.5, 0, 0, 0, 0.5]), mu, CONCAVE).is_extreme
    assert not orbit_extreme_test(Measure(g, [0.25, 0, 0.5, 0, 0.25]), mu, CONCAVE).is_extreme


def test_mps_spread_construction():
    g = uniform_line_grid(5)
    c = mps_exposed_construct(np.abs(g.points[:, 0] - 0.5), uniform(g))
    assert c.contact_set == [0, 4]
    assert np.allclose(c.transport.rows[1], [0.75, 0, 0, 0, 0.25])
    assert c.extreme.is_extreme
    unique, found = unique_optimizer_check(c.exposing_f, uniform(g), CONCAVE, seeds=8)
    assert unique and found[0].close_to(c.nu, 1e-8)


def test_lsd_staircase_construction():
    g = line_grid([0, 1, 2])
    c = lsd_exposed_construct([1, 0, 2], uniform(g))
    assert np.allclose(c.transport.rows[1], [1, 0, 0])
    assert np.allclose(c.nu.weights, [2 / 3, 0, 1 / 3])
    assert c.extreme.is_extreme


def test_lsd_two_dimensional():
    g = Grid([[0, 0], [1, 0], [0, 1], [1, 1]])
    c = lsd_exposed_construct([0.5, 0.2, 0.3, 1.0], uniform(g))
    assert np.allclose(c.fbar, [0.5, 0.5, 0.5, 1])
    assert np.allclose(c.nu.weights, [0.75, 0, 0, 0.25])


def test_non_simplicial_piece_is_refused():
    pts = [[a, b] for a in (0, .5, 1) for b in (0, .5, 1)]
    f = [0 if (a in (0, 1) and b in (0, 1)) else -1 for a, b in pts]
    with pytest.raises(NotExposable) as err:
        mps_exposed_construct(f, uniform(Grid(pts)))
    assert err.value.region is not None


def test_mps_on_the_simplex():
    g = simplex_grid(3, 3)
    P = g.points
    f = P.max(axis=1) - 0.1 * (P.min(axis=1) > 0)
    c = mps_exposed_construct(f, uniform(g))
    assert sorted(c.contact_set) == [i for i in range(len(g)) if P[i].max() == 1]
    assert c.extreme.is_extreme
