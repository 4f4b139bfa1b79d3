"""Acceptance criteria 1-9. Each test prints one [PASS]/[FAIL] line.

Run alone with ``pytest tests/test_acceptance.py -s`` to see the lines inline;
they are also printed under plain ``pytest -v``.
"""

import json
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from oracles import basis_vertices
from stochorder.blackwell import (
    consistency_check,
    constrained_envelope,
    constrained_vs_kg,
    cell_martingale_family,
    martingale_family,
    partition_by_coordinate,
    privacy_cone,
    privacy_family,
    psi,
)
from stochorder.cones import (
    CONCAVE,
    CONVEX,
    INCREASING_CONCAVE,
    NONDECREASING,
    NONINCREASING,
    ConeSpec,
)
from stochorder.coupling import lsd_exposed_construct, mps_exposed_construct, orbit_extreme_test, strassen_coupling
from stochorder.envelope import c_envelope, concavification, dual_envelope_check
from stochorder.errors import NotExposable
from stochorder.lp import LinearProgram, duality_audit, enumerate_vertices, solve_lp, vertex_test
from stochorder.measure import Grid, dirac, random_measure, simplex_grid, uniform_line_grid
from stochorder.optimize import order_polytope, solve_primal, unique_optimizer_check, value_affinity_check
from stochorder.problems import parse_envelope, parse_function, parse_grid, parse_measure
from stochorder.stackelberg import (
    LeaderSet,
    StackelbergProblem,
    exhaustive_leader_value,
    full_information_payoff,
    option_to_own_problem,
    robust_persuasion_problem,
    solve_stackelberg,
    trapezoid_verify,
)
from stochorder.suites import small_line_grids
from stochorder.updating import UpdateRule, divisibility_check, gap_search, interior_binary_grid, payoff_dictionary

FIXTURES = Path(__file__).resolve().parents[1] / "src" / "stochorder" / "fixtures"
MIN_CLOSED = [CONCAVE, NONDECREASING, NONINCREASING, INCREASING_CONCAVE]
AUDITS = []


def fixture(name):
    return parse_envelope(json.loads((FIXTURES / f"{name}.json").read_text()))


def verdict(capsys, number, passed, detail):
    with capsys.disabled():
        print(f"\n[{'PASS' if passed else 'FAIL'}] criterion {number}: {detail}")
    assert passed, detail


# ---------------------------------------------------------------- 1


def test_criterion_1_privacy_envelope(capsys):
    start = time.perf_counter()
    g = simplex_grid(3, 10)
    P = g.points
    f = (P[:, 2] >= P[:, 0]).astype(float)
    cells = ConeSpec.partition_concave(partition_by_coordinate(g, 0))
    with duality_audit() as rec:
        env = c_envelope(f, g, cells).fbar
        # second route: value iteration over the privacy transitions
        iterated = constrained_envelope(f, privacy_family(g, 0))[0]
    AUDITS.append(rec)
    cav = concavification(f, g)
    interior = [i for i, p in enumerate(P) if p.min() > 0]
    x1, x3 = P[:, 0], P[:, 2]
    closed = np.array([(x1[i] <= 0.5) * min(1.0, x3[i] / x1[i]) for i in interior])
    env_err = np.max(np.abs(env[interior] - closed))
    iter_err = np.max(np.abs(iterated[interior] - closed))
    cav_err = np.max(np.abs(cav - np.minimum(1, 1 - x1 + x3)))
    elapsed = time.perf_counter() - start
    ok = len(g) == 66 and env_err <= 1e-6 and iter_err <= 1e-6 and cav_err <= 1e-6 and elapsed <= 10
    verdict(capsys, 1, ok, f"66-point grid, envelope err={env_err:.2g} (iterated {iter_err:.2g}), "
                           f"concavification err={cav_err:.2g}, {elapsed:.1f}s")


# ---------------------------------------------------------------- 2


def test_criterion_2_four_way_equivalence(capsys):
    start = time.perf_counter()
    rng = np.random.default_rng(0)
    problems = []
    with duality_audit() as rec:
        for grid in small_line_grids():
            n = len(grid)
            mus = [dirac(grid, i, True) for i in range(n)] + [random_measure(grid, rng, exact=True) for _ in range(2)]
            for cone in MIN_CLOSED:
                f = np.array([Fraction(int(v), 4) for v in rng.integers(-4, 5, size=n)], dtype=object)
                gap = dual_envelope_check(f, grid, cone, mus[-1], exact=True).gap
                aff = value_affinity_check(f, cone, mus[-1], mus[-2], [Fraction(1, 3), Fraction(1, 2)], exact=True)
                # every nu below mu is a mixture of orbit vertices and couplings mix, so vertices suffice
                found = all(strassen_coupling(mu, type(mu)(grid, v), cone, exact=True).found
                            for mu in mus for v in enumerate_vertices(order_polytope(mu, cone, True), exact=True))
                trap = trapezoid_verify(StackelbergProblem(grid, LeaderSet.simplex(), cone, f, None, None))
                if not (gap == 0 and aff.max_deviation == 0 and found and trap.holds):
                    problems.append(f"{cone.kind.value} n={n}")
            if n < 3:
                continue
            t = grid.coords(True)[:, 0]
            tent = np.array([-abs(v - t[n // 2]) for v in t], dtype=object)
            aff = value_affinity_check(tent, CONVEX, dirac(grid, 0, True), dirac(grid, n - 1, True),
                                       [Fraction(1, 2)], exact=True)
            refused = all(not strassen_coupling(mu, type(mu)(grid, v), CONVEX, exact=True).found
                          for mu in mus for v in enumerate_vertices(order_polytope(mu, CONVEX, True), exact=True)
                          if list(v) != list(mu.weights))
            if not (aff.max_deviation > 0 and refused):
                problems.append(f"convex n={n}")
    AUDITS.append(rec)
    elapsed = time.perf_counter() - start
    ok = not problems and elapsed <= 60
    verdict(capsys, 2, ok, f"{len(small_line_grids())} grids, failures={problems}, {elapsed:.1f}s")


# ---------------------------------------------------------------- 3


def test_criterion_3_value_is_envelope_integral(capsys):
    rng = np.random.default_rng(3)
    g = uniform_line_grid(8)
    worst = 0.0
    with duality_audit() as rec:
        for cone in MIN_CLOSED:
            for _ in range(200):
                f = rng.normal(size=8)
                mu = random_measure(g, rng)
                v = solve_primal(f, mu, cone).value
                worst = max(worst, abs(v - c_envelope(f, g, cone).fbar @ mu.weights))
    AUDITS.append(rec)
    verdict(capsys, 3, worst <= 1e-8, f"4 cones x 200 instances, max |V - sum mu fbar|={worst:.2g}")


# ---------------------------------------------------------------- 4


def test_criterion_4_exposed_points(capsys):
    names = ["mps_spread", "lsd_staircase", "lsd_staircase_2d", "mps_simplex_2d"]
    results = {}
    with duality_audit() as rec:
        for name in names:
            p = fixture(name)["payload"]
            grid = parse_grid(p["grid"])
            f = parse_function(p["f"], grid)
            mu = parse_measure(p.get("mu", "uniform"), grid)
            mps = p.get("construction", "mps") == "mps"
            c = (mps_exposed_construct if mps else lsd_exposed_construct)(f, mu)
            cone = CONCAVE if mps else NONDECREASING
            extreme = orbit_extreme_test(c.nu, mu, cone).is_extreme
            unique, found = unique_optimizer_check(c.exposing_f, mu, cone, seeds=8)
            results[name] = extreme and unique and found[0].close_to(c.nu, 1e-7)
        p = fixture("non_simplicial")["payload"]
        grid = parse_grid(p["grid"])
        try:
            mps_exposed_construct(parse_function(p["f"], grid), parse_measure(p.get("mu", "uniform"), grid))
            results["non_simplicial_guard"] = False
        except NotExposable:
            results["non_simplicial_guard"] = True
    AUDITS.append(rec)
    verdict(capsys, 4, all(results.values()), str(results))


# ---------------------------------------------------------------- 5


def test_criterion_5_blackwell_consistency(capsys):
    with duality_audit() as rec:
        g4 = uniform_line_grid(4)
        convex = consistency_check(CONVEX, martingale_family(g4, True), exact=True)
        tri = Grid([[1, 0, 0], [0, 1, 0], [0, Fraction(1, 2), Fraction(1, 2)], [0, 0, 1]], simplex=True)
        priv_exact = consistency_check(privacy_cone(tri), privacy_family(tri, exact=True), exact=True)
        g6 = simplex_grid(3, 6)
        priv_float = consistency_check(privacy_cone(g6), privacy_family(g6))
        concave = [consistency_check(CONCAVE, fam) for fam in (martingale_family(g4), psi(CONCAVE, g4))]
    AUDITS.append(rec)
    checks = {
        "convex-martingale exact": convex.consistent and all(v == 0 for v in convex.residuals.values()),
        "privacy exact": priv_exact.consistent and all(v == 0 for v in priv_exact.residuals.values()),
        "privacy float res6": priv_float.consistent and max(priv_float.residuals.values()) <= 1e-8,
        "concave fails max-closure": all(not r.max_closed.max_closed and r.max_closed.witness is not None
                                         and not r.consistent for r in concave),
    }
    verdict(capsys, 5, all(checks.values()), str(checks))


# ---------------------------------------------------------------- 6


def test_criterion_6_constrained_vs_unconstrained(capsys):
    # binary state, beliefs on 11 points; the belief 0.2 sits in its own cell
    g = uniform_line_grid(11)
    f = np.zeros(11)
    f[2], f[6], f[10] = 1, 2, 2.2
    fam = cell_martingale_family(g, [[2], [0, 1, 3, 4, 5, 6, 7, 8, 9, 10]])
    with duality_audit() as rec:
        rep = constrained_vs_kg(f, 4, fam)
    AUDITS.append(rec)
    ok = not rep.strictly_dominated and rep.constrained_dominates_kg and rep.binary_state and rep.dichotomy_holds
    verdict(capsys, 6, ok, f"kg={rep.kg} constrained={rep.constrained} "
                           f"strictly_dominated={rep.strictly_dominated} weakly_dominates={rep.constrained_dominates_kg}")


# ---------------------------------------------------------------- 7


def test_criterion_7_updating(capsys):
    start = time.perf_counter()
    p = fixture("grether_gap")["payload"]
    grid = interior_binary_grid(12)
    x_b, x_d = np.asarray(p["x_b"], float), np.asarray(p["x_d"], float)
    fs = payoff_dictionary()
    detail = {}
    ok = len(fs) == 96
    for rule in (UpdateRule.bayes(), UpdateRule.power(0.5), UpdateRule.power(2.0)):
        div = divisibility_check(rule, grid)
        gap = gap_search(rule, grid, x_b, x_d, fs)[0]
        detail[f"{rule.kind}({rule.beta})"] = (f"{div.max_residual:.2g}", f"{gap:.2g}")
        ok = ok and div.max_residual <= 1e-10 and gap <= 1e-8
    rule = UpdateRule.grether(2, 1)
    div = divisibility_check(rule, grid)
    gap = gap_search(rule, grid, x_b, x_d, fs)[0]
    detail["grether(2,1)"] = (f"{div.max_residual:.2g}", f"{gap:.2g}", div.witness)
    ok = ok and div.max_residual >= 1e-3 and div.witness is not None and gap >= 1e-4
    elapsed = time.perf_counter() - start
    ok = ok and elapsed <= 120
    verdict(capsys, 7, ok, f"(residual, gap) {detail}, {elapsed:.1f}s")


# ---------------------------------------------------------------- 8


def test_criterion_8_stackelberg(capsys):
    with duality_audit() as rec:
        r = solve_stackelberg(option_to_own_problem(fixture("option_to_own")["payload"]))
        option = (len(r.mu_star.support(1e-12)) == 1 and r.mu_extreme and r.nu_extreme
                  and len(r.nu_star.support(1e-12)) <= 2)
        g = uniform_line_grid(5)
        rng = np.random.default_rng(8)
        worst = 0.0
        for _ in range(50):
            v = rng.normal(size=5)
            rep = solve_stackelberg(robust_persuasion_problem(v, g, 2))
            worst = max(worst, abs(rep.leader_value - full_information_payoff(v, g, 0.5)))
        prob = StackelbergProblem.from_json(fixture("sequential_persuasion")["payload"])
        seq = solve_stackelberg(prob, exact=True)
        best, _, _ = exhaustive_leader_value(prob, exact=True)
        chain = seq.leader_value == best and seq.mu_extreme and seq.nu_extreme
    AUDITS.append(rec)
    ok = option and worst <= 1e-8 and chain
    verdict(capsys, 8, ok, f"option_to_own mu*={r.mu_star} nu*={r.nu_star}; robust max err={worst:.2g}; "
                           f"sequential value={seq.leader_value} exhaustive={best} chain={seq.mu_star} -> {seq.nu_star}")


# ---------------------------------------------------------------- 9


def random_polytope(rng):
    n = int(rng.integers(2, 11))
    m = int(rng.integers(1, 4 if n > 6 else 5))
    A = rng.integers(-2, 4, size=(m, n)).astype(float)
    A[0] = rng.integers(1, 3, size=n)         # keeps the region bounded
    b = rng.integers(1, 6, size=m).astype(float)
    return A, b


def test_criterion_9_lp_self_checks(capsys):
    rng = np.random.default_rng(9)
    disagreements = 0
    with duality_audit() as rec:
        for _ in range(100):
            A, b = random_polytope(rng)
            n = A.shape[1]
            lp = LinearProgram(np.zeros(n), None, None, A, b)
            verts = basis_vertices(A, b)
            cands = [(v, True) for v in verts]
            for _ in range(3):
                i, j = rng.integers(len(verts), size=2)
                mid = (verts[i] + verts[j]) / 2
                cands.append((mid, any(np.allclose(mid, v, atol=1e-9) for v in verts)))
            for point, is_vertex in cands:
                disagreements += vertex_test(point, lp).is_vertex != is_vertex
        # shared instances: integer programs solved both ways
        worst_gap = 0.0
        for _ in range(40):
            n, m = int(rng.integers(2, 8)), int(rng.integers(1, 5))
            G = rng.integers(-3, 4, size=(m, n)).astype(float)
            h = rng.integers(1, 6, size=m).astype(float)
            lp = LinearProgram(rng.integers(-3, 4, size=n).astype(float), np.ones((1, n)), [1.0], G, h)
            fl, ex = solve_lp(lp), solve_lp(lp, exact=True)
            if fl.status != ex.status:
                worst_gap = np.inf
            elif fl.optimal:
                worst_gap = max(worst_gap, abs(float(fl.value) - float(ex.value)))
    AUDITS.append(rec)
    solves = sum(r["count"] for r in AUDITS)
    residual = max(r["max_residual"] for r in AUDITS)
    ok = residual <= 1e-8 and disagreements == 0 and worst_gap <= 1e-9
    verdict(capsys, 9, ok, f"{solves} audited solves, max duality residual={residual:.2g}; "
                           f"vertex_test disagreements={disagreements}/100 polytopes; exact/float gap={worst_gap:.2g}")
