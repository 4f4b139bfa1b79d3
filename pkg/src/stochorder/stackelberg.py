"""Leader/follower problems where the follower picks nu dominated by the leader's mu.

With a min-closed follower cone and a linear leader objective the whole game
collapses to one program over the leader set: each grid point x is replaced by
the follower's best response to delta_x (ties broken for the leader).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .cones import ConeSpec, dirac_orbit, generator_matrix, is_min_closed
from .coupling import orbit_extreme_test
from .envelope import c_envelope
from .errors import PreconditionError, SizeError, UnsupportedError, ValidationError
from .lp import LinearProgram, Status, enumerate_vertices, lexicographic_solve, solve_lp, vertex_test
from .measure import Grid, Kernel, Measure, as_float, dirac, push, rational_array
from .optimize import order_polytope, solve_primal, solution_set_vertices

VERTEX_CAP = 10_000


@dataclass
class LeaderSet:
    kind: str                       # "simplex" | "orbit" | "polytope"
    gamma: Measure | None = None
    cone: ConeSpec | None = None
    rows: np.ndarray | None = None  # rows @ mu <= rhs
    rhs: np.ndarray | None = None

    @classmethod
    def simplex(cls):
        return cls("simplex")

    @classmethod
    def orbit(cls, gamma: Measure, cone: ConeSpec):
        return cls("orbit", gamma=gamma, cone=cone)

    @classmethod
    def polytope(cls, rows, rhs):
        return cls("polytope", rows=np.atleast_2d(rows), rhs=np.asarray(rhs).reshape(-1))

    def program(self, grid: Grid, exact: bool = False) -> LinearProgram:
        """H-description over mu (zero objective)."""
        n = len(grid)
        dt = object if exact else float
        one = Fraction(1) if exact else 1.0
        zero = Fraction(0) if exact else 0.0
        if self.kind == "orbit":
            return order_polytope(self.gamma, self.cone, exact)
        G = h = None
        if self.kind == "polytope":
            G = rational_array(self.rows) if exact else np.asarray(self.rows, dtype=float)
            h = rational_array(self.rhs) if exact else np.asarray(self.rhs, dtype=float)
        return LinearProgram(np.full(n, zero, dtype=dt), np.full((1, n), one, dtype=dt),
                             np.array([one], dtype=dt), G, h)

    def to_json(self) -> dict:
        out = {"kind": self.kind}
        if self.kind == "orbit":
            out.update(gamma=self.gamma.to_json(), cone=self.cone.to_json())
        if self.kind == "polytope":
            out.update(rows=as_float(self.rows).tolist(), rhs=as_float(self.rhs).tolist())
        return out

    @classmethod
    def from_json(cls, doc, grid: Grid) -> "LeaderSet":
        kind = doc.get("kind")
        if kind == "simplex":
            return cls.simplex()
        if kind == "orbit":
            return cls.orbit(Measure.from_json(doc["gamma"], grid), ConeSpec.from_json(doc["cone"]))
        if kind == "polytope":
            return cls.polytope(doc["rows"], doc["rhs"])
        raise ValidationError(f"unknown leader set {kind!r}")


@dataclass
class StackelbergProblem:
    grid: Grid
    leader_set: LeaderSet
    follower_cone: ConeSpec
    f: np.ndarray                  # follower objective
    w_a: np.ndarray                # leader payoff on mu
    w_b: np.ndarray                # leader payoff on nu
    leader_functional: object = None   # optional quasi-convex W(mu, nu); replaces (w_a, w_b)

    def __post_init__(self):
        n = len(self.grid)
        for name in ("f", "w_a", "w_b"):
            v = getattr(self, name)
            if v is None:
                v = np.zeros(n)
            if len(v) != n:
                raise ValidationError(f"{name} has {len(v)} entries, grid has {n} points")
            setattr(self, name, v)
        self.follower_cone.check_grid(self.grid)

    def to_json(self) -> dict:
        return {
            "grid": self.grid.to_json(),
            "leader_set": self.leader_set.to_json(),
            "follower_cone": self.follower_cone.to_json(),
            "follower_objective": as_float(self.f).tolist(),
            "leader_objective": {"w_a": as_float(self.w_a).tolist(), "w_b": as_float(self.w_b).tolist()},
        }

    @classmethod
    def from_json(cls, doc) -> "StackelbergProblem":
        grid = Grid.from_json(doc["grid"])
        lead = doc.get("leader_objective", {})
        return cls(grid, LeaderSet.from_json(doc.get("leader_set", {"kind": "simplex"}), grid),
                   ConeSpec.from_json(doc["follower_cone"]), doc["follower_objective"],
                   lead.get("w_a"), lead.get("w_b"))


@dataclass
class ModifiedObjective:
    total: np.ndarray       # w_a + w_b_star
    w_b_star: np.ndarray
    best_responses: list    # per grid point, follower-optimal eta best for the leader
    fbar: np.ndarray


def _vec(v, exact):
    return rational_array(v) if exact else np.asarray(v, dtype=float)


def modified_objective(problem: StackelbergProblem, exact: bool = False) -> ModifiedObjective:
    grid, cone = problem.grid, problem.follower_cone
    if not is_min_closed(cone, grid):
        raise UnsupportedError(f"follower cone {cone} is not min-closed; the pointwise reduction does not apply")
    f, wb = _vec(problem.f, exact), _vec(problem.w_b, exact)
    n = len(grid)
    star = np.empty(n, dtype=object if exact else float)
    fbar = np.empty(n, dtype=object if exact else float)
    rows = []
    for x in range(n):
        orb = dirac_orbit(cone, grid, x, exact)
        idx = orb.allowed()
        first, second = lexicographic_solve(orb.to_lp(f), wb[idx], exact=exact)
        if first.status != Status.OPTIMAL or second.status != Status.OPTIMAL:
            raise AssertionError(f"best-response program at point {x} ended {first.status}/{second.status}")
        eta = np.full(n, Fraction(0), dtype=object) if exact else np.zeros(n)
        eta[idx] = second.primal
        star[x] = second.value
        fbar[x] = first.value
        rows.append(eta)
    return ModifiedObjective(_vec(problem.w_a, exact) + star, star, rows, fbar)


@dataclass
class EquilibriumReport:
    mu_star: Measure
    nu_star: Measure
    leader_value: object
    w_b_star: np.ndarray
    mu_extreme: bool
    nu_extreme: bool
    kernel: Kernel | None = None
    truncated: bool = False
    method: str = "modified_objective"

    def to_json(self) -> dict:
        return {
            "mu_star": self.mu_star.to_json(),
            "nu_star": self.nu_star.to_json(),
            "leader_value": float(self.leader_value),
            "w_b_star": as_float(self.w_b_star).tolist(),
            "extremality": {"mu_vertex_of_leader_set": self.mu_extreme, "nu_vertex_of_orbit": self.nu_extreme},
            "truncated": self.truncated,
            "method": self.method,
        }


def _leader_extreme(problem: StackelbergProblem, mu: Measure, exact: bool) -> bool:
    ls = problem.leader_set
    if ls.kind == "simplex":
        return len(mu.support(0 if exact else 1e-12)) == 1
    if ls.kind == "orbit":
        return orbit_extreme_test(mu, ls.gamma, ls.cone, exact).is_extreme
    return vertex_test(mu.weights, ls.program(problem.grid, exact), exact=exact).is_vertex


def _maximize_over_leader_set(problem: StackelbergProblem, w, exact: bool):
    grid, ls = problem.grid, problem.leader_set
    n = len(grid)
    if ls.kind == "simplex":
        best = max(range(n), key=lambda i: (w[i], -i))
        return w[best], dirac(grid, best, exact)
    if ls.kind == "orbit" and is_min_closed(ls.cone, grid):
        gamma = ls.gamma.to_exact() if exact else ls.gamma.to_float()
        env = c_envelope(w, grid, ls.cone, exact=exact)
        kernel = Kernel(grid, np.array([m.weights for m in env.per_point_optimizers]))
        return env.fbar @ gamma.weights, push(kernel, gamma)
    if ls.kind == "orbit":
        rep = solve_primal(w, ls.gamma, ls.cone, exact=exact)
        return rep.value, rep.optimizer
    lp = ls.program(grid, exact)
    lp = LinearProgram(_vec(w, exact), lp.eq_lhs, lp.eq_rhs,
                       lp.ineq_lhs if lp.ineq_lhs.size else None, lp.ineq_rhs if lp.ineq_rhs.size else None)
    sol = solve_lp(lp, exact=exact)
    if sol.status != Status.OPTIMAL:
        raise PreconditionError(f"leader program ended {sol.status}; is the leader set empty?")
    return sol.value, Measure(grid, sol.primal)


def solve_stackelberg(problem: StackelbergProblem, exact: bool = False) -> EquilibriumReport:
    if problem.leader_functional is not None:
        return _solve_by_enumeration(problem, exact)
    mod = modified_objective(problem, exact)
    value, mu = _maximize_over_leader_set(problem, mod.total, exact)
    kernel = Kernel(problem.grid, np.array(mod.best_responses))
    nu = push(kernel, mu.to_exact() if exact else mu.to_float())
    mu_ext = _leader_extreme(problem, mu, exact)
    nu_ext = orbit_extreme_test(nu, mu, problem.follower_cone, exact).is_extreme
    return EquilibriumReport(mu, nu, value, mod.w_b_star, mu_ext, nu_ext, kernel)


def _solve_by_enumeration(problem: StackelbergProblem, exact: bool) -> EquilibriumReport:
    """Quasi-convex leader objective: its maximum over the graph sits at (vertex, face vertex) pairs."""
    grid, W = problem.grid, problem.leader_functional
    verts = enumerate_vertices(problem.leader_set.program(grid, exact), exact=exact)
    truncated = len(verts) > VERTEX_CAP
    best = None
    for v in verts[:VERTEX_CAP]:
        mu = Measure(grid, v)
        face, cut = solution_set_vertices(problem.f, mu, problem.follower_cone, exact=exact)
        truncated = truncated or cut
        for nu in face:
            val = W(mu, nu)
            if best is None or val > best[0]:
                best = (val, mu, nu)
    if best is None:
        raise PreconditionError("leader set has no vertices")
    val, mu, nu = best
    n = len(grid)
    return EquilibriumReport(mu, nu, val, np.zeros(n), True,
                             orbit_extreme_test(nu, mu, problem.follower_cone, exact).is_extreme,
                             None, truncated, "enumeration")


def exhaustive_leader_value(problem: StackelbergProblem, exact: bool = True):
    """Best (vertex of M, follower-optimal vertex of the orbit) pair by brute force.

    Returns (value, mu, nu). Independent of the pointwise reduction: the
    follower's options are the enumerated vertices of its orbit polytope.
    """
    grid = problem.grid
    f, wa, wb = (_vec(v, exact) for v in (problem.f, problem.w_a, problem.w_b))
    best = None
    for v in enumerate_vertices(problem.leader_set.program(grid, exact), exact=exact):
        mu = Measure(grid, v)
        nus = enumerate_vertices(order_polytope(mu, problem.follower_cone, exact), exact=exact)
        top = max(f @ nu for nu in nus)
        tol = 0 if exact else 1e-9
        cands = [nu for nu in nus if f @ nu >= top - tol]
        nu = max(cands, key=lambda c: wb @ c)
        val = wa @ mu.weights + wb @ nu
        if best is None or val > best[0]:
            best = (val, mu, Measure(grid, nu))
    return best


# ---------------------------------------------------------------- graph structure


@dataclass
class TrapezoidReport:
    convex_graph: bool
    vertices: int
    decomposed: int
    failures: list = field(default_factory=list)
    witness: dict | None = None

    @property
    def holds(self) -> bool:
        return self.convex_graph and not self.failures


def trapezoid_verify(problem: StackelbergProblem, exhaustive_cap: int = 6, exact: bool = True) -> TrapezoidReport:
    """Enumerate vertices of {(mu, nu): mu in M, nu optimal for mu} and check each splits
    into (vertex of M, vertex of the follower's optimal face)."""
    grid, cone = problem.grid, problem.follower_cone
    n = len(grid)
    if n > exhaustive_cap:
        raise SizeError(f"grid has {n} points, exhaustive cap is {exhaustive_cap}")
    if not is_min_closed(cone, grid):
        return TrapezoidReport(False, 0, 0, witness=graph_convexity_witness(problem, exact))
    dt = object if exact else float
    zero = Fraction(0) if exact else 0.0
    one = Fraction(1) if exact else 1.0
    f = _vec(problem.f, exact)
    fbar = c_envelope(f, grid, cone, exact=exact).fbar
    G = generator_matrix(cone, grid, exact).astype(dt)
    M = problem.leader_set.program(grid, exact)
    Z = np.full((1, n), zero, dtype=dt)
    eq = [np.hstack([M.eq_lhs.astype(dt), np.full((M.eq_lhs.shape[0], n), zero, dtype=dt)]),
          np.hstack([Z, np.full((1, n), one, dtype=dt)]),
          np.hstack([-fbar.reshape(1, -1).astype(dt), f.reshape(1, -1).astype(dt)])]
    eq_rhs = np.concatenate([M.eq_rhs.astype(dt), np.array([one, zero], dtype=dt)])
    ineq = [np.hstack([-G, G])]
    ineq_rhs = [np.full(len(G), zero, dtype=dt)]
    if M.ineq_lhs.size:
        ineq.append(np.hstack([M.ineq_lhs.astype(dt), np.full((M.ineq_lhs.shape[0], n), zero, dtype=dt)]))
        ineq_rhs.append(M.ineq_rhs.astype(dt))
    graph = LinearProgram(np.full(2 * n, zero, dtype=dt), np.vstack(eq), eq_rhs,
                          np.vstack(ineq), np.concatenate(ineq_rhs))
    verts = enumerate_vertices(graph, exact=exact)
    failures, ok = [], 0
    for v in verts:
        mu, nu = v[:n], v[n:]
        mu_ok = vertex_test(mu, M, exact=exact).is_vertex
        face = order_polytope(Measure(grid, mu), cone, exact)
        face = LinearProgram(face.objective, np.vstack([face.eq_lhs, f.reshape(1, -1).astype(dt)]),
                             np.concatenate([face.eq_rhs, np.array([fbar @ mu], dtype=dt)]),
                             face.ineq_lhs, face.ineq_rhs)
        nu_ok = vertex_test(nu, face, exact=exact).is_vertex
        if mu_ok and nu_ok:
            ok += 1
        else:
            failures.append((as_float(mu).tolist(), as_float(nu).tolist(), mu_ok, nu_ok))
    return TrapezoidReport(True, len(verts), ok, failures)


def graph_convexity_witness(problem: StackelbergProblem, exact: bool = False, tol: float = 1e-9):
    """Two graph points whose midpoint leaves the graph (value strictly above the mixed optimum)."""
    grid, cone = problem.grid, problem.follower_cone
    n = len(grid)
    cands = [dirac(grid, i, exact) for i in range(n)]
    half = Fraction(1, 2) if exact else 0.5
    for i in range(n):
        for j in range(i + 1, n):
            m1, m2 = cands[i], cands[j]
            r1, r2 = solve_primal(problem.f, m1, cone, exact=exact), solve_primal(problem.f, m2, cone, exact=exact)
            mix = m1.mix(m2, half)
            rm = solve_primal(problem.f, mix, cone, exact=exact)
            avg = half * r1.value + (1 - half) * r2.value
            if float(rm.value - avg) > tol:
                return {"mu1": m1.to_json(), "nu1": r1.optimizer.to_json(),
                        "mu2": m2.to_json(), "nu2": r2.optimizer.to_json(),
                        "alpha": float(half), "value_at_mix": float(rm.value), "mixed_value": float(avg)}
    return None


# ---------------------------------------------------------------- menus as orbits


@dataclass
class AmbiguityReport:
    eu_representable: bool
    max_deviation: float
    u_hat: np.ndarray
    witness: dict | None
    formula_residual: float | None


def ambiguity_representation_check(cone: ConeSpec, u, alpha, grid: Grid, samples: int = 20, seed: int = 0,
                                   tol: float = 1e-8) -> AmbiguityReport:
    """Is mu -> alpha max_{nu<=mu} u + (1-alpha) min_{nu<=mu} u an expected utility?"""
    u = np.asarray(u, dtype=float)
    n = len(grid)

    def hurwicz(mu):
        best = solve_primal(u, mu, cone).value
        worst = -solve_primal(-u, mu, cone).value
        return alpha * float(best) + (1 - alpha) * float(worst)

    u_hat = np.array([hurwicz(dirac(grid, i)) for i in range(n)])
    rng = np.random.default_rng(seed)
    tests = [dirac(grid, i).mix(dirac(grid, j), 0.5) for i in range(n) for j in range(i + 1, n)]
    tests += [Measure(grid, rng.dirichlet(np.ones(n))) for _ in range(samples)]
    worst, witness = 0.0, None
    for mu in tests:
        v = hurwicz(mu)
        dev = abs(v - float(u_hat @ mu.weights))
        if dev > worst:
            worst = dev
            witness = {"mu": mu.to_json(), "value": v, "expected_utility": float(u_hat @ mu.weights)}
    formula = None
    if is_min_closed(cone, grid):
        up = c_envelope(u, grid, cone).fbar
        down = c_envelope(-u, grid, cone).fbar
        formula = float(np.max(np.abs(alpha * up - (1 - alpha) * down - u_hat)))
    return AmbiguityReport(worst <= tol, worst, u_hat, witness if worst > tol else None, formula)


# ---------------------------------------------------------------- worked instances


def full_information_payoff(v, grid: Grid, prior: float) -> float:
    """Payoff from revealing the binary state: the chord of v between the two end beliefs."""
    t = grid.points[:, 0]
    lo, hi = int(np.argmin(t)), int(np.argmax(t))
    lam = (t[hi] - prior) / (t[hi] - t[lo])
    return float(lam * v[lo] + (1 - lam) * v[hi])


def robust_persuasion_problem(v, grid: Grid, prior_index: int) -> StackelbergProblem:
    """Sender picks a posterior spread; Nature then adds information to minimize the sender's v."""
    from .cones import CONCAVE

    v = np.asarray(v, dtype=float)
    return StackelbergProblem(grid, LeaderSet.orbit(dirac(grid, prior_index), CONCAVE), CONCAVE,
                              -v, np.zeros(len(grid)), v)


def sequential_persuasion_problem(v_first, v_second, grid: Grid, prior_index: int,
                                  exact: bool = False) -> StackelbergProblem:
    """Two senders split beliefs in turn; the second best-responds to the first's split."""
    from .cones import CONCAVE

    return StackelbergProblem(grid, LeaderSet.orbit(dirac(grid, prior_index, exact), CONCAVE), CONCAVE,
                              _vec(v_second, exact), np.zeros(len(grid)), _vec(v_first, exact))


def option_to_own_problem(doc) -> StackelbergProblem:
    """Designer posts a price lottery mu; the seller answers with nu that leaves every type
    at least as well off. Payoffs of a posted price p are tallied over the type distribution:
    sum over types theta >= p of weight * (slope * theta + intercept + price_weight * p)."""
    from .cones import INCREASING_CONCAVE
    from .measure import line_grid

    prices = np.asarray(doc["prices"], dtype=float)
    types = np.asarray(doc["types"], dtype=float)
    tw = np.asarray(doc["type_weights"], dtype=float)
    tw = tw / tw.sum()

    def tally(spec):
        a, b, lam = spec.get("slope", 0.0), spec.get("intercept", 0.0), spec.get("price_weight", 0.0)
        return np.array([np.sum(tw * (types >= p - 1e-12) * (a * types + b + lam * p)) for p in prices])

    grid = line_grid(prices)
    return StackelbergProblem(grid, LeaderSet.simplex(), INCREASING_CONCAVE, tally(doc["seller"]),
                              np.zeros(len(prices)), tally(doc["designer"]))
