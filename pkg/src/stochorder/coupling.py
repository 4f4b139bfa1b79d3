"""Order-preserving couplings, unique rationalization and exposed points of orbits."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .cones import (
    CONCAVE,
    NONDECREASING,
    ConeSpec,
    coupling_program,
    dirac_orbit,
    generator_matrix,
    is_min_closed,
    kernel_from_plan,
)
from .envelope import c_envelope
from .errors import (
    DimensionError,
    InvariantViolation,
    NotExposable,
    PreconditionError,
    UnsupportedError,
)
from .lp import LinearProgram, Status, lexicographic_solve, matrix_rank, solve_lp, vertex_test
from .measure import Grid, Kernel, Measure, as_float, push, rational_array
from .optimize import order_polytope

FOUND = "Found"
NO_COUPLING = "NoCoupling"


@dataclass
class CouplingResult:
    status: str
    kernel: Kernel | None = None
    farkas: np.ndarray | None = None
    margin: float = 0.0    # int h dnu minus the best value reachable from mu (positive on failure)

    @property
    def found(self) -> bool:
        return self.status == FOUND


def best_reachable(h, mu: Measure, cone: ConeSpec) -> float:
    """sum_x mu(x) max{int h deta : eta in orbit(x)}."""
    total = 0.0
    for x in mu.support(0.0):
        val, _, _ = dirac_orbit(cone, mu.grid, x).maximize(np.asarray(h, dtype=float), exact=False)
        total += float(mu.weights[x]) * float(val)
    return total


def strassen_coupling(mu: Measure, nu: Measure, cone: ConeSpec, exact: bool = False) -> CouplingResult:
    """Kernel P with P*mu = nu whose rows stay in the Dirac orbits, or a separating test function.

    On failure h = -(multipliers of the pushforward rows) of a Farkas vector;
    it satisfies int h dnu > sum_x mu(x) sup_{eta in orbit(x)} int h deta.
    """
    if mu.grid != nu.grid:
        raise DimensionError("measures live on different grids")
    cone.check_grid(mu.grid)
    prog = coupling_program(mu, cone, nu=nu, exact=exact)
    sol = solve_lp(prog.lp, exact=exact)
    if sol.optimal:
        return CouplingResult(FOUND, kernel_from_plan(prog, mu, sol.primal, exact))
    y = sol.dual
    h = -np.array([float(y[i]) for i in prog.target_rows])
    scale = np.max(np.abs(h))
    if scale > 0:
        h = h / scale
    margin = float(as_float(nu.weights) @ h) - best_reachable(h, mu, cone)
    return CouplingResult(NO_COUPLING, None, h, margin)


def _polytope_singleton(lp: LinearProgram, point, exact: bool) -> bool:
    """Is ``point`` the only feasible solution of lp (standard form with bounds, no ineq rows)?

    Looks for a nonzero direction d with A d = 0 that keeps the point feasible:
    the support columns must be independent and no direction may raise a
    coordinate sitting at its lower bound.
    """
    A = lp.eq_lhs
    n = lp.n
    tol = 0 if exact else 1e-9
    S = [j for j in range(n) if abs(point[j] - lp.lower[j]) > tol]
    Z = [j for j in range(n) if j not in S]
    if S and matrix_rank(A[:, S], exact=exact) < len(S):
        return False
    if not Z:
        return True
    # maximize sum_{Z} d_j  s.t. A d = 0, d_Z >= 0, sum_{Z} d_j <= 1, d_S free
    dt = object if exact else float
    one = Fraction(1) if exact else 1.0
    zero = Fraction(0) if exact else 0.0
    obj = np.full(n, zero, dtype=dt)
    obj[Z] = one
    cap = np.full((1, n), zero, dtype=dt)
    cap[0, Z] = one
    lower = [(-np.inf if j in S else 0) for j in range(n)]
    rows = A if A.size else None
    sol = solve_lp(LinearProgram(obj, rows, np.full(A.shape[0], zero, dtype=dt) if A.size else None, cap,
                                 np.array([one], dtype=dt), lower=lower), exact=exact)
    return sol.optimal and float(sol.value) <= (0 if exact else 1e-9)


@dataclass
class UniquenessReport:
    unique: bool
    kernels: list = field(default_factory=list)
    probes: int = 0


def unique_rationalization_check(mu: Measure, nu: Measure, cone: ConeSpec, seeds: int = 16, seed: int = 0,
                                 exact: bool = False) -> UniquenessReport:
    """Is there exactly one order-preserving kernel carrying mu to nu (rows on supp mu)?

    Random functionals are maximized and minimized over the coupling
    polytope; if they all agree, a singleton test on the polytope settles it.
    """
    prog = coupling_program(mu, cone, nu=nu, exact=exact)
    base = solve_lp(prog.lp, exact=exact)
    if not base.optimal:
        raise PreconditionError("no order-preserving coupling exists")
    lp = prog.lp.to_exact() if exact else prog.lp.to_float()
    rng = np.random.default_rng(seed)
    ref = base.primal
    tol = 0 if exact else 1e-8
    N = lp.n
    for k in range(seeds):
        c = rng.normal(size=N)
        c = rational_array(c) if exact else c
        for sign in (1, -1):
            probe = LinearProgram(sign * c, lp.eq_lhs, lp.eq_rhs, lp.ineq_lhs if lp.ineq_lhs.size else None,
                                  lp.ineq_rhs if lp.ineq_rhs.size else None)
            sol = solve_lp(probe, exact=exact)
            diff = max(abs(float(sol.primal[j] - ref[j])) for j in range(N)) if N else 0.0
            if diff > (0 if exact else 1e-7):
                return UniquenessReport(False, [kernel_from_plan(prog, mu, ref, exact),
                                                kernel_from_plan(prog, mu, sol.primal, exact)], 2 * k + 2)
    if lp.ineq_lhs.size:
        # orbit inequality rows: move them to equalities with explicit slacks
        m_ub = lp.ineq_lhs.shape[0]
        dt = lp.eq_lhs.dtype
        slack = lp.ineq_rhs - lp.ineq_lhs @ ref
        A = np.vstack([np.hstack([lp.eq_lhs, np.zeros((lp.eq_lhs.shape[0], m_ub), dtype=int).astype(dt)]),
                       np.hstack([lp.ineq_lhs, np.eye(m_ub, dtype=int).astype(dt)])])
        b = np.concatenate([lp.eq_rhs, lp.ineq_rhs])
        std = LinearProgram(np.zeros(N + m_ub, dtype=int).astype(dt), A, b)
        point = np.concatenate([ref, slack])
    else:
        std, point = lp, ref
    unique = _polytope_singleton(std, point, exact)
    kernels = [kernel_from_plan(prog, mu, ref, exact)]
    if not unique:
        # a second kernel along a feasible direction
        c = rng.normal(size=N)
        sol = solve_lp(LinearProgram(rational_array(c) if exact else c, lp.eq_lhs, lp.eq_rhs,
                                     lp.ineq_lhs if lp.ineq_lhs.size else None,
                                     lp.ineq_rhs if lp.ineq_rhs.size else None), exact=exact)
        kernels.append(kernel_from_plan(prog, mu, sol.primal, exact))
    return UniquenessReport(unique, kernels, 2 * seeds)


# ---------------------------------------------------------------- extremality


def _lifted_extreme(nu: Measure, mu: Measure, cone: ConeSpec, exact: bool) -> bool:
    """nu is extreme in {nu' <= mu} iff no d != 0 has nu + d and nu - d both dominated by mu.

    Two coupling copies g1, g2 with pushforwards nu + d and nu - d; maximize
    each coordinate of d = push(g1) - nu.
    """
    prog = coupling_program(mu, cone, exact=exact)
    lp = prog.lp.to_exact() if exact else prog.lp.to_float()
    n = len(mu.grid)
    N = lp.n
    dt = object if exact else float
    zero = Fraction(0) if exact else 0.0
    one = Fraction(1) if exact else 1.0
    w = nu.to_exact().weights if exact else as_float(nu.weights)

    def block(M, left):
        Z = np.full(M.shape, zero, dtype=dt)
        return np.hstack([M, Z]) if left else np.hstack([Z, M])

    T = np.full((n, N), zero, dtype=dt)
    for k, (_, y) in enumerate(prog.pairs):
        T[y, k] = one
    eq = [block(lp.eq_lhs, True), block(lp.eq_lhs, False), np.hstack([T, T])]
    rhs = [lp.eq_rhs, lp.eq_rhs, 2 * w]
    ub = [block(lp.ineq_lhs, True), block(lp.ineq_lhs, False)] if lp.ineq_lhs.size else []
    ub_rhs = [lp.ineq_rhs, lp.ineq_rhs] if lp.ineq_lhs.size else []
    A = np.vstack(eq)
    b = np.concatenate(rhs)
    G = np.vstack(ub) if ub else None
    h = np.concatenate(ub_rhs) if ub else None
    tol = 0 if exact else 1e-9
    for y in range(n):
        obj = np.hstack([T[y], np.full(N, zero, dtype=dt)])
        sol = solve_lp(LinearProgram(obj, A, b, G, h), exact=exact)
        if not sol.optimal:
            raise PreconditionError("nu is not dominated by mu")
        if float(sol.value - w[y]) > tol:
            return False
    return True


def _extreme_by_generators(nu: Measure, mu: Measure, cone: ConeSpec, exact: bool):
    try:
        lp = order_polytope(mu, cone, exact)
    except UnsupportedError:
        return None
    w = nu.to_exact().weights if exact else as_float(nu.weights)
    return vertex_test(w, lp, exact=exact).is_vertex


def rows_pointwise_extreme(kernel: Kernel, mu: Measure, cone: ConeSpec, exact: bool = False) -> bool:
    for x in mu.support(0.0) if not exact else mu.to_exact().support():
        orb = dirac_orbit(cone, mu.grid, x, exact)
        row = kernel.rows[x]
        if exact:
            row = rational_array(row)
        if not vertex_test(row, orb.full_lp(np.zeros(orb.n)), exact=exact, tol=1e-8).is_vertex:
            return False
    return True


@dataclass
class ExtremeReport:
    is_extreme: bool
    by_polytope: bool
    by_rationalization: bool | None
    method: str


def orbit_extreme_test(nu: Measure, mu: Measure, cone: ConeSpec, exact: bool = False) -> ExtremeReport:
    """Is nu an extreme point of {nu' : nu' <=_C mu}?

    Route one tests nu as a vertex of the order polytope (generator
    description, or the lifted two-coupling program when the cone has no
    finite generator set). Route two, for min-closed cones, asks for a
    unique order-preserving kernel whose rows are vertices of their own
    Dirac orbits. The routes must agree.
    """
    if nu.grid != mu.grid:
        raise DimensionError("measures live on different grids")
    grid = mu.grid
    a = _extreme_by_generators(nu, mu, cone, exact)
    method = "generators"
    if a is None:
        if not is_min_closed(cone, grid):
            raise UnsupportedError("no finite description of the order polytope for this cone")
        a = _lifted_extreme(nu, mu, cone, exact)
        method = "lifted"
    b = None
    if is_min_closed(cone, grid):
        coup = strassen_coupling(mu, nu, cone, exact)
        if not coup.found:
            raise PreconditionError("nu is not dominated by mu")
        uniq = unique_rationalization_check(mu, nu, cone, exact=exact)
        b = uniq.unique and rows_pointwise_extreme(uniq.kernels[0], mu, cone, exact)
        if a != b:
            raise InvariantViolation(
                f"extremality routes disagree: polytope says {a}, unique-rationalization says {b}")
    return ExtremeReport(a, a, b, method)


# ---------------------------------------------------------------- exposed points


@dataclass
class Region:
    points: list        # R: grid indices whose envelope lies on this piece
    touching: list      # T: contact points on the piece
    kind: str           # "Simplex" | "Staircase"


@dataclass
class ExposedConstruction:
    exposing_f: np.ndarray
    contact_set: list
    regions: list
    transport: Kernel
    nu: Measure
    fbar: np.ndarray
    extreme: ExtremeReport | None = None

    def to_json(self) -> dict:
        return {
            "exposing_f": [float(v) for v in self.exposing_f],
            "fbar": [float(v) for v in self.fbar],
            "contact_set": list(map(int, self.contact_set)),
            "regions": [{"points": list(map(int, r.points)), "touching": list(map(int, r.touching)), "kind": r.kind}
                        for r in self.regions],
            "transport": self.transport.to_json(),
            "nu": self.nu.to_json(),
        }


def _affine_coords(grid: Grid) -> np.ndarray:
    P = grid.points
    return P[:, :-1] if grid.simplex_flag and P.shape[1] > 1 else P


def _supporting_plane(f, grid: Grid, x: int):
    """(intercept, slope) of an affine majorant of f touching the envelope at x, from the orbit LP dual."""
    orb = dirac_orbit(CONCAVE, grid, x)
    sol = solve_lp(orb.to_lp(np.asarray(f, dtype=float)))
    if sol.status != Status.OPTIMAL:
        raise AssertionError("orbit program must be solvable")
    pi = np.asarray(sol.dual, dtype=float)
    return pi[0], pi[1: 1 + orb.eq_rows.shape[0]]


def _check_full_support(mu: Measure):
    if len(mu.support(0.0)) != len(mu.grid):
        raise PreconditionError("exposed-point constructions need a full-support measure")


def _strict_contact(f, grid: Grid, cone: ConeSpec, x: int) -> bool:
    """delta_x is the only optimizer of the orbit problem at a contact point x."""
    orb = dirac_orbit(cone, grid, x)
    lp = orb.to_lp(np.asarray(f, dtype=float))
    allowed = orb.allowed()
    sec = np.array([-1.0 if y == x else 0.0 for y in allowed])
    first, second = lexicographic_solve(lp, sec)
    k = allowed.index(x)
    return float(second.primal[k]) >= 1 - 1e-9


def mps_exposed_construct(f, mu: Measure, tol: float = 1e-7) -> ExposedConstruction:
    """Barycentric splitting kernel that makes push(P, mu) the unique maximizer of f over spreads of mu."""
    grid = mu.grid
    _check_full_support(mu)
    f = np.asarray(f, dtype=float)
    env = c_envelope(f, grid, CONCAVE)
    fbar, S = env.fbar, set(env.contact_set)
    n = len(grid)
    X = _affine_coords(grid)
    rows = np.zeros((n, n))
    regions: dict = {}
    for x in range(n):
        if x in S:
            if not _strict_contact(f, grid, CONCAVE, x):
                raise NotExposable(f"contact point {x} is a mixture of other contact points", region=[x])
            rows[x, x] = 1.0
            continue
        c0, c = _supporting_plane(f, grid, x)
        key = tuple(np.round(np.concatenate([[c0], c]) / tol).astype(np.int64))
        if key not in regions:
            h = c0 + X @ c
            T = [y for y in sorted(S) if abs(h[y] - f[y]) <= 1e-8]
            R = [y for y in range(n) if abs(h[y] - fbar[y]) <= 1e-8]
            Aff = np.hstack([np.ones((len(T), 1)), X[T]])
            if matrix_rank(Aff) < len(T):
                raise NotExposable(f"touching set {T} of the piece through point {x} is not affinely independent",
                                   region=R)
            regions[key] = Region(R, T, "Simplex")
        reg = regions[key]
        if x not in reg.points:
            reg.points.append(x)
        T = reg.touching
        Aff = np.hstack([np.ones((len(T), 1)), X[T]])
        lam, *_ = np.linalg.lstsq(Aff.T, np.concatenate([[1.0], X[x]]), rcond=None)
        if np.max(np.abs(Aff.T @ lam - np.concatenate([[1.0], X[x]]))) > 1e-8 or np.min(lam) < -1e-9:
            raise NotExposable(f"point {x} is not in the simplex spanned by {T}", region=reg.points)
        rows[x, T] = np.clip(lam, 0.0, None)
    P = Kernel(grid, rows)
    nu = push(P, mu.to_float())
    out = ExposedConstruction(f, sorted(S), list(regions.values()), P, nu, fbar)
    out.extreme = orbit_extreme_test(nu, mu.to_float(), CONCAVE)
    if not out.extreme.is_extreme:
        raise InvariantViolation("barycentric splitting did not produce an extreme point")
    return out


def lsd_exposed_construct(f, mu: Measure) -> ExposedConstruction:
    """Deterministic downward transport making push(P, mu) the unique maximizer of f below mu."""
    grid = mu.grid
    _check_full_support(mu)
    f = np.asarray(f, dtype=float)
    env = c_envelope(f, grid, NONDECREASING)
    fbar, S = env.fbar, env.contact_set
    n = len(grid)
    rows = np.zeros((n, n))
    regions: dict = {}
    for x in range(n):
        z = fbar[x]
        below = [t for t in range(n) if grid.partial_order[t, x] and abs(f[t] - z) <= 1e-8]
        if len(below) != 1:
            raise NotExposable(f"point {x} has {len(below)} admissible targets {below} at level {z:.6g}",
                               region=[x] + below)
        t = below[0]
        rows[x, t] = 1.0
        key = round(float(z), 9)
        if x not in S:
            reg = regions.setdefault(key, Region([], [], "Staircase"))
            reg.points.append(x)
            if t not in reg.touching:
                reg.touching.append(t)
    for key, reg in regions.items():
        reg.touching.sort()
    P = Kernel(grid, rows)
    nu = push(P, mu.to_float())
    out = ExposedConstruction(f, list(S), list(regions.values()), P, nu, fbar)
    out.extreme = orbit_extreme_test(nu, mu.to_float(), NONDECREASING)
    if not out.extreme.is_extreme:
        raise InvariantViolation("downward transport did not produce an extreme point")
    return out
