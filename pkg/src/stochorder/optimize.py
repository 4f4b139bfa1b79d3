"""Maximize sum f dnu over all nu dominated by mu, plus value-function diagnostics."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .cones import (
    ConeKind,
    ConeSpec,
    _sampled_convex_tests,
    coupling_program,
    generator_matrix,
    is_min_closed,
    kernel_from_plan,
)
from .envelope import dual_envelope_check
from .errors import DimensionError, UnsupportedError
from .lp import LinearProgram, Status, lexicographic_solve, solve_lp, vertex_test
from .measure import Kernel, Measure, as_float, push, rational_array, to_rational


@dataclass
class SolveReport:
    value: object
    optimizer: Measure
    coupling: Kernel | None = None
    duality_gap: float | None = None
    affine_certificate: object = None
    sound_only: bool = False
    status: str = "Optimal"
    method: str = "coupling"

    def to_json(self) -> dict:
        return {
            "value": float(self.value),
            "optimizer": self.optimizer.to_json(),
            "coupling": self.coupling.to_json() if self.coupling is not None else None,
            "duality_gap": None if self.duality_gap is None else float(self.duality_gap),
            "sound_only": self.sound_only,
            "status": self.status,
            "method": self.method,
        }


def order_polytope(mu: Measure, cone: ConeSpec, exact: bool = False, tests: np.ndarray | None = None) -> LinearProgram:
    """{nu : nu >= 0, sum nu = 1, G nu <= G mu} from the cone's generators (zero objective)."""
    grid = mu.grid
    n = len(grid)
    G = generator_matrix(cone, grid, exact) if tests is None else tests
    dt = object if exact else float
    w = mu.to_exact().weights if exact else as_float(mu.weights)
    one = Fraction(1) if exact else 1.0
    zero = Fraction(0) if exact else 0.0
    G = np.asarray(G, dtype=dt).reshape(-1, n)
    return LinearProgram(np.full(n, zero, dtype=dt), np.full((1, n), one, dtype=dt), np.array([one], dtype=dt),
                         G if len(G) else None, (G @ w) if len(G) else None)


def _with_objective(lp: LinearProgram, f) -> LinearProgram:
    return LinearProgram(f, lp.eq_lhs if lp.eq_lhs.size else None, lp.eq_rhs if lp.eq_rhs.size else None,
                         lp.ineq_lhs if lp.ineq_lhs.size else None, lp.ineq_rhs if lp.ineq_rhs.size else None,
                         lp.lower, lp.upper, lp.maximize)


def _vector(f, n, exact):
    if len(f) != n:
        raise DimensionError(f"function has {len(f)} entries, grid has {n} points")
    return rational_array(f) if exact else np.asarray(f, dtype=float)


def solve_primal(f, mu: Measure, cone: ConeSpec, exact: bool = False, samples: int = 256,
                 seed: int = 0) -> SolveReport:
    grid = mu.grid
    cone.check_grid(grid)
    fv = _vector(f, len(grid), exact)
    if is_min_closed(cone, grid):
        prog = coupling_program(mu, cone, objective=fv, exact=exact)
        sol = solve_lp(prog.lp, exact=exact)
        if sol.status != Status.OPTIMAL:
            raise AssertionError(f"coupling program ended {sol.status}; nu = mu is always feasible")
        kernel = kernel_from_plan(prog, mu, sol.primal, exact)
        base = mu.to_exact() if exact else mu.to_float()
        nu = push(kernel, base)
        try:
            dual = dual_envelope_check(fv, grid, cone, base, exact=exact).dual_value
            gap = abs(float(dual) - float(sol.value))
        except UnsupportedError:
            gap = None   # no finite dual rows for this cone on this grid
        return SolveReport(sol.value, nu, kernel, gap, method="coupling")
    sound_only = False
    try:
        lp = order_polytope(mu, cone, exact)
        method = "generators"
    except UnsupportedError:
        if cone.kind not in (ConeKind.CONVEX, ConeKind.CONCAVE):
            raise
        rng = np.random.default_rng(seed)
        lp = order_polytope(mu, cone, False, tests=_sampled_convex_tests(grid, cone, rng, samples))
        sound_only, method, exact = True, "sampled", False
    sol = solve_lp(_with_objective(lp, fv), exact=exact)
    if sol.status != Status.OPTIMAL:
        raise AssertionError(f"order program ended {sol.status}; nu = mu is always feasible")
    return SolveReport(sol.value, Measure(grid, sol.primal), None, sol.duality_residual(),
                       sound_only=sound_only, method=method)


def value(f, mu: Measure, cone: ConeSpec, exact: bool = False):
    return solve_primal(f, mu, cone, exact=exact).value


@dataclass
class AffinityReport:
    max_deviation: float
    witness_alpha: object
    values: list = field(default_factory=list)
    holds: bool = True


def value_affinity_check(f, cone: ConeSpec, mu1: Measure, mu2: Measure, alphas, exact: bool = False,
                         tol: float = 1e-8) -> AffinityReport:
    """max over alpha of |V(a mu1 + (1-a) mu2) - a V(mu1) - (1-a) V(mu2)|."""
    if mu1.grid != mu2.grid:
        raise DimensionError("measures live on different grids")
    if exact:
        mu1, mu2 = mu1.to_exact(), mu2.to_exact()
    v1 = solve_primal(f, mu1, cone, exact=exact).value
    v2 = solve_primal(f, mu2, cone, exact=exact).value
    worst, witness, rows = 0.0, None, []
    for a in alphas:
        a = to_rational(a) if exact else float(a)
        mix = mu1.mix(mu2, a)
        vm = solve_primal(f, mix, cone, exact=exact).value
        dev = abs(vm - a * v1 - (1 - a) * v2)
        rows.append((a, vm, dev))
        if float(dev) > float(worst) or witness is None:
            worst, witness = dev, a
    holds = float(worst) <= (0 if exact else tol)
    report = AffinityReport(float(worst), witness, rows, holds)
    if is_min_closed(cone, mu1.grid) and not holds:
        # min-closed cones must have affine values; anything else is a solver defect
        from .errors import InvariantViolation

        raise InvariantViolation(f"value of a min-closed cone deviates from affinity by {float(worst)}")
    return report


def _face_directions(n: int, count: int, seed: int):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        yield rng.normal(size=n)


def _optimal_face_max(f, mu: Measure, cone: ConeSpec, direction, exact: bool = False) -> Measure:
    """Among optimal nu, one maximizing sum direction dnu."""
    grid = mu.grid
    fv = _vector(f, len(grid), exact)
    d = rational_array(direction) if exact else np.asarray(direction, dtype=float)
    if is_min_closed(cone, grid):
        prog = coupling_program(mu, cone, objective=fv, exact=exact)
        sec = np.array([d[y] for (_, y) in prog.pairs], dtype=object if exact else float)
        first, second = lexicographic_solve(prog.lp, sec, exact=exact)
        kernel = kernel_from_plan(prog, mu, second.primal, exact)
        return push(kernel, mu.to_exact() if exact else mu.to_float())
    lp = _with_objective(order_polytope(mu, cone, exact), fv)
    first, second = lexicographic_solve(lp, d, exact=exact)
    return Measure(grid, second.primal)


def unique_optimizer_check(f, mu: Measure, cone: ConeSpec, seeds: int = 8, seed: int = 0,
                           exact: bool = False, tol: float = 1e-8):
    """(unique?, list of optimal measures found) by maximizing and minimizing random
    functionals over the optimal face."""
    found = []
    for k, c in enumerate(_face_directions(len(mu.grid), seeds, seed)):
        for sign in (1, -1):
            found.append(_optimal_face_max(f, mu, cone, sign * c, exact))
    ref = found[0]
    unique = all(float(np.max(np.abs(as_float(m.weights) - as_float(ref.weights)))) <= tol for m in found)
    return unique, found


def solution_set_vertices(f, mu: Measure, cone: ConeSpec, cap: int = 50, seed: int = 0, exact: bool = False,
                          restarts: int | None = None):
    """Vertices of the optimal face found by random-direction restarts.

    Returns (vertices, truncated). Each candidate maximizes a generic
    functional over the face; when the order has a finite generator
    description the candidate is also confirmed with a vertex test.
    """
    grid = mu.grid
    if not is_min_closed(cone, grid):
        raise UnsupportedError("solution-set enumeration needs a min-closed cone")
    rep = solve_primal(f, mu, cone, exact=exact)
    try:
        face = order_polytope(mu, cone, exact)
        fv = _vector(f, len(grid), exact)
        dt = object if exact else float
        face = LinearProgram(face.objective, np.vstack([face.eq_lhs, fv.reshape(1, -1).astype(dt)]),
                             np.concatenate([face.eq_rhs, np.array([rep.value], dtype=dt)]),
                             face.ineq_lhs if face.ineq_lhs.size else None,
                             face.ineq_rhs if face.ineq_rhs.size else None)
    except UnsupportedError:
        face = None
    out: list[Measure] = []
    restarts = restarts if restarts is not None else 4 * cap + 8
    truncated = False
    for k, c in enumerate(_face_directions(len(grid), restarts, seed)):
        nu = _optimal_face_max(f, mu, cone, c, exact)
        if any(float(np.max(np.abs(as_float(nu.weights) - as_float(v.weights)))) <= 1e-9 for v in out):
            continue
        if face is not None and not vertex_test(nu.weights, face, exact=exact).is_vertex:
            continue
        out.append(nu)
        if len(out) >= cap:
            truncated = True
            break
    return out, truncated
