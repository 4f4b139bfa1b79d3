import json
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import option_to_own_brute
from stochorder.cones import CONCAVE, CONVEX, INCREASING_CONCAVE, NONDECREASING
from stochorder.envelope import c_envelope
from stochorder.errors import SizeError, UnsupportedError
from stochorder.measure import dirac, line_grid, uniform, uniform_line_grid
from stochorder.stackelberg import (
    LeaderSet,
    StackelbergProblem,
    ambiguity_representation_check,
    exhaustive_leader_value,
    full_information_payoff,
    modified_objective,
    option_to_own_problem,
    robust_persuasion_problem,
    sequential_persuasion_problem,
    solve_stackelberg,
    trapezoid_verify,
)

FIXTURES = Path(__file__).resolve().parents[1] / "src" / "stochorder" / "fixtures"


def test_leader_ignores_the_follower_when_it_does_not_care():
    g = uniform_line_grid(5)
    wa = np.array([0.1, 0.7, -1, 0.3, 0.2])
    rep = solve_stackelberg(StackelbergProblem(g, LeaderSet.simplex(), CONCAVE, [0, 1, 0, 1, 0], wa, None))
    assert rep.leader_value == pytest.approx(0.7)
    assert rep.mu_star.support(1e-12) == [1]


def test_aligned_leader_gets_the_follower_envelope():
    g = uniform_line_grid(5)
    f = np.array([0.0, 1.0, 0.2, 0.0, 0.9])
    wa = np.array([0.0, 0.0, 0.5, 0.0, 0.0])
    rep = solve_stackelberg(StackelbergProblem(g, LeaderSet.simplex(), CONCAVE, f, wa, f))
    fbar = c_envelope(f, g, CONCAVE).fbar
    assert rep.leader_value == pytest.approx(np.max(wa + fbar))
    assert np.allclose(rep.w_b_star, fbar)


def test_follower_ties_break_toward_the_leader():
    g = uniform_line_grid(3)
    prob = StackelbergProblem(g, LeaderSet.simplex(), CONCAVE, np.zeros(3), None, [1.0, 0.0, 1.0])
    mod = modified_objective(prob, exact=True)
    assert list(mod.w_b_star) == [1, 1, 1]


def test_non_min_closed_follower_is_refused():
    g = uniform_line_grid(4)
    with pytest.raises(UnsupportedError):
        modified_objective(StackelbergProblem(g, LeaderSet.simplex(), CONVEX, np.ones(4), None, None))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 3))
def test_robust_persuasion_is_full_disclosure(seed, prior):
    g = uniform_line_grid(5)
    v = np.random.default_rng(seed).normal(size=5)
    rep = solve_stackelberg(robust_persuasion_problem(v, g, prior))
    assert abs(rep.leader_value - full_information_payoff(v, g, g.points[prior, 0])) < 1e-8
    best, _, _ = exhaustive_leader_value(robust_persuasion_problem(v, g, prior), exact=False)
    assert abs(rep.leader_value - best) < 1e-8


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000))
def test_sequential_persuasion_matches_exhaustive_search(seed):
    rng = np.random.default_rng(seed)
    g = line_grid([0, Fraction(1, 4), Fraction(1, 2), Fraction(3, 4), 1])
    v1 = [Fraction(int(k), 4) for k in rng.integers(-4, 5, size=5)]
    v2 = [Fraction(int(k), 4) for k in rng.integers(-4, 5, size=5)]
    prob = sequential_persuasion_problem(v1, v2, g, 2, exact=True)
    rep = solve_stackelberg(prob, exact=True)
    best, _, _ = exhaustive_leader_value(prob, exact=True)
    assert rep.leader_value == best
    assert rep.mu_extreme and rep.nu_extreme


def test_sequential_fixture():
    doc = json.loads((FIXTURES / "sequential_persuasion.json").read_text())["payload"]
    prob = StackelbergProblem.from_json(doc)
    rep = solve_stackelberg(prob, exact=True)
    assert rep.leader_value == Fraction(2, 3)
    assert exhaustive_leader_value(prob)[0] == Fraction(2, 3)


def test_option_to_own_fixture_against_brute_force():
    doc = json.loads((FIXTURES / "option_to_own.json").read_text())["payload"]
    prob = option_to_own_problem(doc)
    rep = solve_stackelberg(prob)
    value, p = option_to_own_brute(doc["prices"], prob.f, prob.w_b)
    assert rep.leader_value == pytest.approx(value, abs=1e-9)
    assert len(rep.mu_star.support(1e-12)) == 1
    assert len(rep.nu_star.support(1e-12)) <= 2
    assert rep.mu_extreme and rep.nu_extreme


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000))
def test_random_option_to_own(seed):
    rng = np.random.default_rng(seed)
    doc = {
        "prices": np.linspace(0, 1, 6).tolist(),
        "types": np.sort(rng.uniform(0, 1, size=7)).tolist(),
        "type_weights": rng.uniform(0.1, 1, size=7).tolist(),
        "seller": {"slope": 0.0, "intercept": 0.0, "price_weight": 1.0},
        "designer": {k: float(x) for k, x in zip(("slope", "intercept", "price_weight"), rng.normal(size=3))},
    }
    prob = option_to_own_problem(doc)
    rep = solve_stackelberg(prob)
    value, _ = option_to_own_brute(doc["prices"], prob.f, prob.w_b)
    assert rep.leader_value == pytest.approx(value, abs=1e-9)


@pytest.mark.parametrize("cone", [CONCAVE, NONDECREASING, INCREASING_CONCAVE])
def test_graph_vertices_split_into_vertices(cone):
    g = uniform_line_grid(4)
    f = np.array([0.3, -0.2, 0.5, 0.1])
    for leader in (LeaderSet.simplex(), LeaderSet.orbit(dirac(g, 2), CONCAVE)):
        rep = trapezoid_verify(StackelbergProblem(g, leader, cone, f, None, None))
        assert rep.holds and rep.vertices == rep.decomposed > 0


def test_single_leader_measure():
    g = uniform_line_grid(4)
    rows = np.vstack([np.eye(4), -np.eye(4)])
    mu = uniform(g).weights
    rep = trapezoid_verify(StackelbergProblem(g, LeaderSet.polytope(rows, np.concatenate([mu, -mu])), CONCAVE,
                                              [0, 1, 0, 1], None, None))
    assert rep.holds


def test_convex_follower_graph_is_not_convex():
    g = uniform_line_grid(3)
    tent = -np.abs(g.points[:, 0] - 0.5)
    rep = trapezoid_verify(StackelbergProblem(g, LeaderSet.simplex(), CONVEX, tent, None, None))
    assert not rep.convex_graph and not rep.holds
    w = rep.witness
    assert w["value_at_mix"] > w["mixed_value"]


def test_trapezoid_size_cap():
    g = uniform_line_grid(8)
    with pytest.raises(SizeError):
        trapezoid_verify(StackelbergProblem(g, LeaderSet.simplex(), CONCAVE, np.zeros(8), None, None))


def test_polytope_leader_set_matches_exhaustive():
    g = uniform_line_grid(4)
    rows = np.array([[1.0, 0, 0, 0], [0, 0, 0, 1.0]])
    prob = StackelbergProblem(g, LeaderSet.polytope(rows, [0.3, 0.3]), CONCAVE,
                              [0.0, 1.0, 0.0, 0.5], [0.2, 0.0, 0.1, 0.0], [1.0, 0.0, 0.0, 0.4])
    rep = solve_stackelberg(prob)
    best, _, _ = exhaustive_leader_value(prob, exact=False)
    assert rep.leader_value == pytest.approx(best)


def test_problem_json_round_trip():
    g = uniform_line_grid(4)
    prob = StackelbergProblem(g, LeaderSet.orbit(dirac(g, 1), CONCAVE), NONDECREASING,
                              [0.0, 1.0, 0.0, 0.5], [0.2, 0.0, 0.1, 0.0], [1.0, 0.0, 0.0, 0.4])
    back = StackelbergProblem.from_json(json.loads(json.dumps(prob.to_json())))
    assert back.to_json() == prob.to_json()
    assert solve_stackelberg(back).leader_value == pytest.approx(solve_stackelberg(prob).leader_value)


def test_ambiguity_over_a_min_closed_menu_is_expected_utility():
    g = uniform_line_grid(5)
    u = np.random.default_rng(1).normal(size=5)
    rep = ambiguity_representation_check(CONCAVE, u, 0.3, g)
    assert rep.eu_representable and rep.formula_residual < 1e-9


def test_ambiguity_over_convex_menu_is_not_expected_utility():
    g = uniform_line_grid(5)
    tent = -np.abs(g.points[:, 0] - 0.5)
    rep = ambiguity_representation_check(CONVEX, tent, 1.0, g)
    assert not rep.eu_representable and rep.witness is not None
    assert rep.formula_residual is None
