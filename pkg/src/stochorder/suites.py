"""Property suites run by ``stochorder verify``.

Each suite returns Line records (name, passed, detail) at fixed seeds. Fixture
documents come from a directory of problem files; suites that need a fixture
report a failing line when it is missing.
"""

from __future__ import annotations

import json
import pathlib
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import problems as pb
from .errors import NotExposable, ValidationError


@dataclass
class Line:
    suite: str
    name: str
    passed: bool
    detail: str = ""

    def render(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.suite}/{self.name}: {self.detail}"


def load_fixtures(directory) -> dict:
    d = pathlib.Path(directory)
    files = sorted(d.glob("*.json")) if d.is_dir() else []
    if not files:
        raise ValidationError(f"no fixture files in {directory}")
    out = {}
    for f in files:
        try:
            out[f.stem] = pb.parse_envelope(json.loads(f.read_text()))
        except json.JSONDecodeError as exc:
            raise ValidationError(f"fixture {f.name} is not JSON: {exc}") from exc
    return out


def _fixture(fx, name, suite):
    if name not in fx:
        return None, Line(suite, name, False, "fixture missing")
    return fx[name], None


# ---------------------------------------------------------------- four-way equivalence


def small_line_grids():
    from .measure import line_grid, uniform_line_grid

    grids = [uniform_line_grid(n) for n in range(2, 6)]
    grids.append(line_grid([Fraction(0), Fraction(1, 5), Fraction(1, 2), Fraction(1)]))
    grids.append(line_grid([Fraction(0), Fraction(1, 3), Fraction(1, 2), Fraction(3, 4), Fraction(1)]))
    return grids


def four_way_equivalence(fx, seed=0):
    from .cones import CONCAVE, CONVEX, INCREASING_CONCAVE, NONDECREASING, NONINCREASING
    from .coupling import strassen_coupling
    from .envelope import dual_envelope_check
    from .measure import dirac, random_measure
    from .optimize import solve_primal, value_affinity_check
    from .stackelberg import LeaderSet, StackelbergProblem, trapezoid_verify

    rng = np.random.default_rng(seed)
    lines = []
    for grid in small_line_grids():
        n = len(grid)
        tag = f"n={n} pts={[float(p) for p in grid.points[:, 0]]}"
        for cone in (CONCAVE, NONDECREASING, NONINCREASING, INCREASING_CONCAVE):
            f = np.array([Fraction(int(v), 4) for v in rng.integers(-4, 5, size=n)], dtype=object)
            mu1, mu2 = random_measure(grid, rng, exact=True), random_measure(grid, rng, exact=True)
            gap = dual_envelope_check(f, grid, cone, mu1, exact=True).gap
            aff = value_affinity_check(f, cone, mu1, mu2, [Fraction(1, 3), Fraction(1, 2)], exact=True)
            found = True
            for mu in (mu1, mu2, dirac(grid, n - 1, True)):
                nu = solve_primal(f, mu, cone, exact=True).optimizer
                found = found and strassen_coupling(mu, nu, cone, exact=True).found
            trap = trapezoid_verify(StackelbergProblem(grid, LeaderSet.simplex(), cone, f, None, None))
            ok = gap == 0 and aff.max_deviation == 0 and found and trap.holds
            lines.append(Line("theorem1", f"{cone}/{tag}", ok,
                              f"gap={gap} affine_dev={aff.max_deviation} couplings={found} "
                              f"graph_vertices={trap.decomposed}/{trap.vertices}"))
        if n < 3:
            continue
        t = grid.coords(True)[:, 0]
        mid = t[n // 2]
        tent = np.array([-abs(v - mid) for v in t], dtype=object)
        aff = value_affinity_check(tent, CONVEX, dirac(grid, 0, True), dirac(grid, n - 1, True),
                                   [Fraction(1, 2), Fraction(1, 3)], exact=True)
        refused = True
        for _ in range(4):
            mu = random_measure(grid, rng, exact=True)
            nu = solve_primal(tent, mu, CONVEX, exact=True).optimizer
            if nu.weights.tolist() != mu.weights.tolist():
                refused = refused and not strassen_coupling(mu, nu, CONVEX, exact=True).found
        ok = aff.max_deviation > 0 and refused
        lines.append(Line("theorem1", f"convex/{tag}", ok,
                          f"affine_dev={float(aff.max_deviation):.4g} no_coupling={refused}"))
    return lines


# ---------------------------------------------------------------- blackwell


def blackwell(fx, seed=0):
    from .blackwell import consistency_check, martingale_family, privacy_cone, privacy_family
    from .cones import CONCAVE, CONVEX, closure_classify
    from .measure import Grid, simplex_grid, uniform_line_grid

    lines = []
    g4 = uniform_line_grid(4)
    r = consistency_check(CONVEX, martingale_family(g4, True), seed=seed, exact=True)
    lines.append(Line("blackwell", "convex-martingale/exact", r.consistent, str(r.residuals)))
    tri = Grid([[1, 0, 0], [0, 1, 0], [0, Fraction(1, 2), Fraction(1, 2)], [0, 0, 1]], simplex=True)
    r = consistency_check(privacy_cone(tri), privacy_family(tri, exact=True), seed=seed, exact=True)
    lines.append(Line("blackwell", "privacy/exact", r.consistent, str(r.residuals)))
    g6 = simplex_grid(3, 6)
    r = consistency_check(privacy_cone(g6), privacy_family(g6), seed=seed)
    lines.append(Line("blackwell", "privacy/float-res6", r.consistent and max(r.residuals.values()) <= 1e-8,
                      str(r.residuals)))
    c = closure_classify(CONCAVE, uniform_line_grid(5), seed=seed)
    lines.append(Line("blackwell", "concave-not-max-closed", not c.max_closed and c.witness is not None,
                      f"label={c.label}"))
    return lines


# ---------------------------------------------------------------- exposed points


def exposed(fx, seed=0):
    from .cones import CONCAVE, NONDECREASING
    from .coupling import lsd_exposed_construct, mps_exposed_construct
    from .optimize import unique_optimizer_check

    lines = []
    chosen = {k: v for k, v in fx.items() if v["problem_kind"] == "expose"}
    if not chosen:
        return [Line("exposed", "fixtures", False, "no expose fixtures")]
    for name, doc in chosen.items():
        p = doc["payload"]
        grid = pb.parse_grid(p["grid"])
        f = pb.parse_function(p["f"], grid)
        mu = pb.parse_measure(p.get("mu", "uniform"), grid)
        mps = p.get("construction", "mps") == "mps"
        build = mps_exposed_construct if mps else lsd_exposed_construct
        expect_error = doc.get("expect", {}).get("error")
        try:
            c = build(f, mu)
        except NotExposable as exc:
            lines.append(Line("exposed", name, expect_error == "NotExposable", f"NotExposable: {exc}"))
            continue
        if expect_error:
            lines.append(Line("exposed", name, False, f"expected {expect_error}, construction succeeded"))
            continue
        cone = CONCAVE if mps else NONDECREASING
        unique, found = unique_optimizer_check(c.exposing_f, mu, cone, seeds=8, seed=seed)
        same = unique and found[0].close_to(c.nu, 1e-7)
        ok = c.extreme is not None and c.extreme.is_extreme and same
        lines.append(Line("exposed", name, ok,
                          f"extreme={c.extreme.is_extreme if c.extreme else None} unique_by_perturbation={same}"))
    return lines


# ---------------------------------------------------------------- updating


def updating(fx, seed=0):
    from .updating import UpdateRule, divisibility_check, gap_search, interior_binary_grid, payoff_dictionary

    doc, missing = _fixture(fx, "grether_gap", "updating")
    if missing:
        return [missing]
    p = doc["payload"]
    grid = interior_binary_grid(int(p.get("resolution", 12)), float(p.get("eps", 1e-3)))
    x_b, x_d = np.asarray(p["x_b"], float), np.asarray(p["x_d"], float)
    fs = payoff_dictionary(seed=int(p.get("dictionary_seed", 0)))
    lines = []
    for rule in (UpdateRule.bayes(), UpdateRule.power(0.5), UpdateRule.power(2.0)):
        div = divisibility_check(rule, grid)
        gap = gap_search(rule, grid, x_b, x_d, fs)[0]
        lines.append(Line("updating", f"{rule.kind}({rule.beta})", div.max_residual <= 1e-10 and gap <= 1e-8,
                          f"divisibility_residual={div.max_residual:.3g} max_gap={gap:.3g}"))
    rule = UpdateRule.from_json(p["rule"])
    div = divisibility_check(rule, grid)
    gap, idx, params = gap_search(rule, grid, x_b, x_d, fs)
    ok = div.max_residual >= 1e-3 and div.witness is not None and gap >= 1e-4
    lines.append(Line("updating", f"grether({rule.alpha},{rule.beta})", ok,
                      f"divisibility_residual={div.max_residual:.3g} witness={div.witness} "
                      f"max_gap={gap:.3g} payoff#{idx}"))
    return lines


# ---------------------------------------------------------------- stackelberg


def stackelberg(fx, seed=0):
    from .measure import uniform_line_grid
    from .stackelberg import (
        StackelbergProblem,
        exhaustive_leader_value,
        full_information_payoff,
        option_to_own_problem,
        robust_persuasion_problem,
        solve_stackelberg,
    )

    lines = []
    doc, missing = _fixture(fx, "option_to_own", "stackelberg")
    if missing:
        lines.append(missing)
    else:
        r = solve_stackelberg(option_to_own_problem(doc["payload"]))
        dirac_mu = len(r.mu_star.support(1e-12)) == 1
        small_nu = len(r.nu_star.support(1e-12)) <= 2
        lines.append(Line("stackelberg", "option_to_own", dirac_mu and small_nu and r.mu_extreme and r.nu_extreme,
                          f"mu*={r.mu_star} nu*={r.nu_star} flags=({r.mu_extreme},{r.nu_extreme})"))
    g = uniform_line_grid(5)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(50):
        v = rng.normal(size=5)
        rep = solve_stackelberg(robust_persuasion_problem(v, g, 2))
        worst = max(worst, abs(float(rep.leader_value) - full_information_payoff(v, g, 0.5)))
    lines.append(Line("stackelberg", "robust_persuasion", worst <= 1e-8, f"max_error={worst:.3g}"))
    doc, missing = _fixture(fx, "sequential_persuasion", "stackelberg")
    if missing:
        lines.append(missing)
    else:
        prob = StackelbergProblem.from_json(doc["payload"])
        r = solve_stackelberg(prob, exact=True)
        best, mu_b, nu_b = exhaustive_leader_value(prob, exact=True)
        ok = r.leader_value == best and r.mu_extreme and r.nu_extreme
        lines.append(Line("stackelberg", "sequential_persuasion", ok,
                          f"value={r.leader_value} exhaustive={best} chain={r.mu_star} -> {r.nu_star}"))
    return lines


SUITES = {
    "theorem1": four_way_equivalence,
    "blackwell": blackwell,
    "exposed": exposed,
    "updating": updating,
    "stackelberg": stackelberg,
}


def run_suite(name, fx, seed=0):
    return SUITES[name](fx, seed)
