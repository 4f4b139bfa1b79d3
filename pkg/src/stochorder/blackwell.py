"""Kernel families, the utility/kernel correspondence, and constrained information design.

A rectangular kernel family is a choice of polyhedron P_x of measures for
every grid point x. ``psi`` sends a cone C to the family of transitions that
improve every g in C; ``phi_membership`` asks whether a function is improved
by every transition of a family.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .cones import (
    CONCAVE,
    CONVEX,
    ClosureReport,
    ConeKind,
    ConeSpec,
    OrbitPolyhedron,
    _coord_rows,
    closure_classify,
    coupling_program,
    dirac_orbit,
    facet_rows,
    generator_matrix,
    order_leq,
    sample_member,
)
from .coupling import strassen_coupling
from .envelope import concavification
from .errors import DimensionError, InapplicableError, UnsupportedError, ValidationError
from .lp import LinearProgram, enumerate_vertices, solve_lp
from .measure import Grid, Kernel, Measure, as_float, compose, dirac, push, random_measure, rational_array
from .optimize import unique_optimizer_check


@dataclass
class PointSet:
    """Polyhedron of measures attached to one grid point: H-form (``poly``) or V-form (``vertices``)."""

    base_point: int
    poly: OrbitPolyhedron | None = None
    vertices: np.ndarray | None = None

    def maximize(self, g, exact: bool = False):
        if self.poly is not None:
            val, eta, _ = self.poly.maximize(g, exact=exact)
            return val, eta
        V = rational_array(self.vertices) if exact else np.asarray(self.vertices, dtype=float)
        gv = rational_array(g) if exact else np.asarray(g, dtype=float)
        vals = V @ gv
        k = max(range(len(vals)), key=lambda i: vals[i])
        return vals[k], V[k].copy()

    def minimize(self, g, exact: bool = False):
        val, eta = self.maximize(-(rational_array(g) if exact else np.asarray(g, dtype=float)), exact)
        return -val, eta

    def contains(self, eta, tol: float = 1e-9, exact: bool = False) -> bool:
        if self.poly is not None:
            if exact and not self.poly.exact:
                return dirac_like(self.poly, True).contains(rational_array(eta))
            return self.poly.contains(eta, tol)
        return _in_hull(self.vertices, eta, exact) <= (0 if exact else tol)

    def to_json(self) -> dict:
        if self.poly is not None:
            p = self.poly
            return {"eq_rows": as_float(p.eq_rows).tolist(), "eq_rhs": as_float(p.eq_rhs).tolist(),
                    "ineq_rows": as_float(p.ineq_rows).tolist(), "ineq_rhs": as_float(p.ineq_rhs).tolist(),
                    "support": [bool(v) for v in p.support_mask]}
        return {"vertices": as_float(self.vertices).tolist()}


def dirac_like(poly: OrbitPolyhedron, exact: bool) -> OrbitPolyhedron:
    """Same polyhedron with rational data."""
    conv = rational_array if exact else (lambda a: np.asarray(a, dtype=float))
    return OrbitPolyhedron(poly.base_point, conv(poly.eq_rows).reshape(poly.eq_rows.shape),
                           conv(poly.eq_rhs), conv(poly.ineq_rows).reshape(poly.ineq_rows.shape),
                           conv(poly.ineq_rhs), poly.support_mask.copy(), exact)


def _in_hull(V, eta, exact: bool = False):
    """L1 distance from eta to conv(rows of V)."""
    V = rational_array(V) if exact else np.asarray(V, dtype=float)
    eta = rational_array(eta) if exact else np.asarray(eta, dtype=float)
    k, n = V.shape
    dt = object if exact else float
    one = Fraction(1) if exact else 1.0
    zero = Fraction(0) if exact else 0.0
    # lam (k), e+ (n), e- (n):  V^T lam + e+ - e- = eta, sum lam = 1
    eye = np.eye(n, dtype=int).astype(dt)
    A = np.vstack([np.hstack([V.T, eye, -eye]),
                   np.concatenate([np.full(k, one, dtype=dt), np.full(2 * n, zero, dtype=dt)])])
    b = np.concatenate([eta, [one]])
    obj = np.concatenate([np.full(k, zero, dtype=dt), np.full(2 * n, one, dtype=dt)])
    sol = solve_lp(LinearProgram(obj, A, b, maximize=False), exact=exact)
    return sol.value


@dataclass
class KernelFamily:
    grid: Grid
    sets: list
    name: str = "family"

    def __len__(self):
        return len(self.sets)

    def contains_identity(self, tol: float = 1e-9) -> bool:
        n = len(self.grid)
        return all(s.contains(np.eye(n)[x], tol) for x, s in enumerate(self.sets))

    def contains_kernel(self, kernel: Kernel, tol: float = 1e-9, exact: bool = False):
        """(True, None) or (False, offending row index)."""
        for x, s in enumerate(self.sets):
            if not s.contains(kernel.rows[x], tol, exact):
                return False, x
        return True, None

    def sample_kernel(self, rng: np.random.Generator, exact: bool = False, direction=None) -> Kernel:
        """Kernel whose rows are vertices of the P_x (maximizers of a random functional)."""
        n = len(self.grid)
        rows = []
        c = rng.normal(size=n) if direction is None else np.asarray(direction, dtype=float)
        if exact:
            c = rational_array(np.round(c, 6))
        for s in self.sets:
            _, eta = s.maximize(c, exact)
            rows.append(eta)
        return Kernel(self.grid, np.array(rows, dtype=object if exact else float))

    def to_json(self) -> dict:
        return {"name": self.name, "grid": self.grid.to_json(), "sets": [s.to_json() for s in self.sets]}


def _empty(n, exact):
    dt = object if exact else float
    return np.zeros((0, n), dtype=dt), np.zeros(0, dtype=dt)


def psi(cone: ConeSpec, grid: Grid, exact: bool = False) -> KernelFamily:
    """Transitions improving every member of the cone: P_x = {eta : delta_x <=_C eta}."""
    flipped = cone.negate()
    sets = [PointSet(x, poly=dirac_orbit(flipped, grid, x, exact)) for x in range(len(grid))]
    return KernelFamily(grid, sets, f"psi({cone})")


def martingale_family(grid: Grid, exact: bool = False) -> KernelFamily:
    """All mean-preserving transitions."""
    n = len(grid)
    rows = _coord_rows(grid, None, exact)
    ub, ub_rhs = _empty(n, exact)
    sets = [PointSet(x, poly=OrbitPolyhedron(x, rows, np.array([r[x] for r in rows], dtype=rows.dtype), ub, ub_rhs,
                                             np.ones(n, dtype=bool), exact)) for x in range(n)]
    return KernelFamily(grid, sets, "martingale")


def partition_by_coordinate(grid: Grid, coord: int = 0) -> list:
    """Blocks of grid indices sharing the value of one coordinate."""
    blocks: dict = {}
    for i, p in enumerate(grid.rational_points):
        blocks.setdefault(p[coord], []).append(i)
    return [blocks[k] for k in sorted(blocks)]


def cell_martingale_family(grid: Grid, partition, exact: bool = False, name: str = "privacy") -> KernelFamily:
    """Mean-preserving transitions that stay inside the partition cell of the current point."""
    n = len(grid)
    rows = _coord_rows(grid, None, exact)
    ub, ub_rhs = _empty(n, exact)
    cell = {}
    for block in partition:
        for i in block:
            cell[i] = list(block)
    if sorted(cell) != list(range(n)):
        raise ValidationError("partition must cover the grid exactly once")
    sets = []
    for x in range(n):
        mask = np.zeros(n, dtype=bool)
        mask[cell[x]] = True
        sets.append(PointSet(x, poly=OrbitPolyhedron(x, rows, np.array([r[x] for r in rows], dtype=rows.dtype),
                                                     ub, ub_rhs, mask, exact)))
    return KernelFamily(grid, sets, name)


def privacy_family(grid: Grid, coord: int = 0, exact: bool = False) -> KernelFamily:
    """Signals that keep the belief in one protected coordinate fixed."""
    return cell_martingale_family(grid, partition_by_coordinate(grid, coord), exact, "privacy")


def privacy_cone(grid: Grid, coord: int = 0) -> ConeSpec:
    """Functions convex along every cell of the privacy partition."""
    return ConeSpec.partition_concave(partition_by_coordinate(grid, coord), negated=True)


def bounded_drift_family(grid: Grid, radius: float) -> KernelFamily:
    """d = 1: transitions whose mean moves by at most ``radius``."""
    if grid.dim != 1:
        raise UnsupportedError("bounded drift family is defined on one-dimensional grids")
    n = len(grid)
    t = grid.points[:, 0]
    eq, eq_rhs = _empty(n, False)
    sets = []
    for x in range(n):
        G = np.vstack([t, -t])
        h = np.array([t[x] + radius, -(t[x] - radius)])
        sets.append(PointSet(x, poly=OrbitPolyhedron(x, eq, eq_rhs, G, h, np.ones(n, dtype=bool))))
    return KernelFamily(grid, sets, f"drift<={radius}")


def identity_family(grid: Grid) -> KernelFamily:
    n = len(grid)
    return KernelFamily(grid, [PointSet(x, vertices=np.eye(n)[x: x + 1]) for x in range(n)], "identity")


def stopping_family(Q: Kernel) -> KernelFamily:
    """One step of a Markov chain Q or stop: P_x = conv{delta_x, Q(x, .)}."""
    n = len(Q.grid)
    sets = [PointSet(x, vertices=np.vstack([np.eye(n)[x], as_float(Q.rows[x])])) for x in range(n)]
    return KernelFamily(Q.grid, sets, "stopping")


# ---------------------------------------------------------------- phi


@dataclass
class PhiReport:
    member: bool
    witness: int | None
    residual: float


def phi_membership(g, family: KernelFamily, tol: float = 1e-9, exact: bool = False) -> PhiReport:
    """Is g improved by every transition: min_{eta in P_x} int g deta >= g(x) for all x?"""
    g = rational_array(g) if exact else np.asarray(g, dtype=float)
    if len(g) != len(family.grid):
        raise DimensionError("function length does not match the family grid")
    worst, witness = 0.0, None
    for x, s in enumerate(family.sets):
        lo, _ = s.minimize(g, exact)
        short = g[x] - lo
        if float(short) > worst:
            worst, witness = float(short), x
    return PhiReport(worst <= (0 if exact else tol), witness, worst)


def composition_closure_check(family: KernelFamily, trials: int = 50, seed: int = 0, exact: bool = False,
                              tol: float = 1e-9):
    """(closed?, witness) from composing sampled vertex kernels; the witness is
    (x, composed row)."""
    rng = np.random.default_rng(seed)
    n = len(family.grid)
    dirs = [None] * trials
    P = family.grid.points
    for k in range(P.shape[1]):
        dirs += [P[:, k], -P[:, k]]
    for d in dirs:
        k1 = family.sample_kernel(rng, exact, d)
        k2 = family.sample_kernel(rng, exact, d)
        comp = compose(k1, k2)
        ok, x = family.contains_kernel(comp, tol, exact)
        if not ok:
            return False, (x, comp.rows[x])
    return True, None


# ---------------------------------------------------------------- consistency


def _set_excess(A: PointSet, B: PointSet, n: int, exact: bool) -> float:
    """How far A sticks out of B (0 when A is inside B)."""
    if A.poly is None:
        V = A.vertices
    elif B.poly is None:
        lp = A.poly.full_lp(np.zeros(n, dtype=object if exact else float))
        V = np.array(enumerate_vertices(lp, exact=exact))
    else:
        V = None
    if V is not None:
        return max(float(_row_excess(v, B, exact)) for v in V)
    worst = 0.0
    b = dirac_like(B.poly, exact)
    for r, rhs in zip(b.eq_rows, b.eq_rhs):
        hi, _ = A.maximize(r, exact)
        lo, _ = A.minimize(r, exact)
        worst = max(worst, float(hi - rhs), float(rhs - lo))
    for r, rhs in zip(b.ineq_rows, b.ineq_rhs):
        hi, _ = A.maximize(r, exact)
        worst = max(worst, float(hi - rhs))
    for y in np.nonzero(~b.support_mask)[0]:
        e = np.zeros(n, dtype=int)
        e[y] = 1
        hi, _ = A.maximize(rational_array(e) if exact else e.astype(float), exact)
        worst = max(worst, float(hi))
    return worst


def _row_excess(eta, B: PointSet, exact: bool):
    if B.poly is None:
        return _in_hull(B.vertices, eta, exact)
    b = dirac_like(B.poly, exact)
    w = rational_array(eta) if exact else np.asarray(eta, dtype=float)
    out = [0]
    if len(b.eq_rows):
        out += list(np.abs(b.eq_rows @ w - b.eq_rhs))
    if len(b.ineq_rows):
        out += list(b.ineq_rows @ w - b.ineq_rhs)
    out += [abs(w[y]) for y in np.nonzero(~b.support_mask)[0]]
    return max(out, key=float)


def phi_program(family: KernelFamily, exact: bool = False):
    """Linear description of Phi(family) in lifted variables (g, per-point duals).

    Returns (n_vars, lower, A_ub, b_ub) with g in the first n coordinates;
    the box -1 <= g <= 1 is included to normalize the cone.
    """
    n = len(family.grid)
    dt = object if exact else float
    zero = Fraction(0) if exact else 0.0
    one = Fraction(1) if exact else 1.0
    cols = n
    blocks = []
    for x, s in enumerate(family.sets):
        if s.poly is None:
            blocks.append(("V", x, None, 0))
        else:
            p = dirac_like(s.poly, exact)
            k, l = p.eq_rows.shape[0], p.ineq_rows.shape[0]
            blocks.append(("H", x, p, cols))
            cols += 1 + k + l
    rows, rhs = [], []
    lower = [-one] * n
    upper = [one] * n
    for kind, x, p, start in blocks:
        if kind == "V":
            for v in family.sets[x].vertices:
                # g(x) - v . g <= 0
                r = np.full(cols, zero, dtype=dt)
                r[:n] = -(rational_array(v) if exact else np.asarray(v, dtype=float))
                r[x] += one
                rows.append(r)
                rhs.append(zero)
            continue
        k, l = p.eq_rows.shape[0], p.ineq_rows.shape[0]
        u, v0, w0 = start, start + 1, start + 1 + k
        for y in p.allowed():
            r = np.full(cols, zero, dtype=dt)
            r[u] = one
            r[v0: v0 + k] = p.eq_rows[:, y]
            r[w0: w0 + l] = -p.ineq_rows[:, y]
            r[y] -= one
            rows.append(r)
            rhs.append(zero)
        r = np.full(cols, zero, dtype=dt)
        r[x] = one
        r[u] = -one
        r[v0: v0 + k] = -p.eq_rhs
        r[w0: w0 + l] = p.ineq_rhs
        rows.append(r)
        rhs.append(zero)
        lower += [-np.inf] * (1 + k) + [0] * l
        upper += [np.inf] * (1 + k + l)
    return cols, lower, upper, np.array(rows, dtype=dt), np.array(rhs, dtype=dt)


def phi_inside_cone(family: KernelFamily, cone: ConeSpec, exact: bool = False, samples: int = 64,
                    seed: int = 0) -> float:
    """Largest violation of a facet row of C by an element of Phi(family) in the unit box."""
    grid = family.grid
    cols, lower, upper, G, h = phi_program(family, exact)
    dt = object if exact else float
    try:
        M = facet_rows(cone, grid, exact)
        objectives = [np.concatenate([m, np.zeros(cols - len(m), dtype=int).astype(dt)]) for m in M]
        custom = None
    except UnsupportedError:
        if cone.kind != ConeKind.CUSTOM:
            raise
        rng = np.random.default_rng(seed)
        objectives = [np.concatenate([rng.normal(size=len(grid)), np.zeros(cols - len(grid))]) for _ in range(samples)]
        custom = np.asarray(cone.generators, dtype=float) * (-1 if cone.negated else 1)
        exact = False
    worst = 0.0
    for obj in objectives:
        sol = solve_lp(LinearProgram(obj, None, None, G, h, lower=lower, upper=upper, maximize=False), exact=exact)
        if not sol.optimal:
            raise AssertionError(f"phi program ended {sol.status}")
        if custom is None:
            worst = max(worst, -float(sol.value))
        else:
            from .cones import custom_membership

            if not custom_membership(as_float(sol.primal[: len(grid)]), custom, 1e-7):
                worst = max(worst, 1.0)
    return worst


def cone_inside_phi(cone: ConeSpec, family: KernelFamily, exact: bool = False, samples: int = 64,
                    seed: int = 0) -> float:
    grid = family.grid
    try:
        G = generator_matrix(cone, grid, exact)
    except UnsupportedError:
        rng = np.random.default_rng(seed)
        G = np.array([sample_member(cone, grid, rng) for _ in range(samples)])
        exact = False
    worst = 0.0
    for g in G:
        worst = max(worst, phi_membership(g, family, exact=exact).residual)
    return worst


def family_reachable(mu: Measure, nu: Measure, family: KernelFamily, exact: bool = False) -> bool:
    """Is nu = K * mu for some kernel K in the family?"""
    grid = mu.grid
    if all(s.poly is not None for s in family.sets):
        prog = coupling_program(mu, None, nu=nu, exact=exact,
                                orbit_of=lambda x: dirac_like(family.sets[x].poly, exact))
        return solve_lp(prog.lp, exact=exact).optimal
    # mixed / vertex form: weights lam_{x,k} on the vertices of every P_x in supp mu
    dt = object if exact else float
    zero = Fraction(0) if exact else 0.0
    one = Fraction(1) if exact else 1.0
    m = mu.to_exact() if exact else mu.to_float()
    t = nu.to_exact().weights if exact else as_float(nu.weights)
    src = m.support() if exact else m.support(0.0)
    verts = {}
    for x in src:
        s = family.sets[x]
        if s.poly is None:
            verts[x] = rational_array(s.vertices) if exact else np.asarray(s.vertices, dtype=float)
        else:
            lp = s.poly.full_lp(np.zeros(len(grid)))
            verts[x] = np.array(enumerate_vertices(lp, exact=exact), dtype=dt)
    cols = sum(len(v) for v in verts.values())
    n = len(grid)
    A = np.full((len(src) + n, cols), zero, dtype=dt)
    b = np.concatenate([[m.weights[x] for x in src], t]).astype(dt)
    c = 0
    for i, x in enumerate(src):
        for v in verts[x]:
            A[i, c] = one
            A[len(src):, c] = v
            c += 1
    return solve_lp(LinearProgram(np.full(cols, zero, dtype=dt), A, b), exact=exact).optimal


@dataclass
class ConsistencyReport:
    max_closed: ClosureReport
    composition_closed: tuple
    psi_of_c: KernelFamily
    residuals: dict
    consistent: bool
    exact: bool
    phi_of_p_membership: object = None


def _sample_pairs(family: KernelFamily, rng, count: int, exact: bool):
    grid = family.grid
    pairs = []
    for k in range(count):
        mu = random_measure(grid, rng, exact=exact) if k % 3 else dirac(grid, int(rng.integers(len(grid))), exact)
        if k % 2 == 0:
            K = family.sample_kernel(rng, exact)
            nu = push(K, mu)
        else:
            nu = random_measure(grid, rng, exact=exact)
        pairs.append((mu, nu))
        pairs.append((nu, mu))
    return pairs


def consistency_check(cone: ConeSpec, family: KernelFamily, samples: int = 12, seed: int = 0,
                      exact: bool = False) -> ConsistencyReport:
    """Residuals of the fixed-point identities psi(C) = P, Phi(P) = C and of order agreement."""
    grid = family.grid
    n = len(grid)
    closure = closure_classify(cone, grid, seed=seed)
    comp = composition_closure_check(family, seed=seed, exact=exact)
    ps = psi(cone, grid, exact)
    residuals = {}
    residuals["psi_vs_family"] = max(
        max(_set_excess(ps.sets[x], family.sets[x], n, exact), _set_excess(family.sets[x], ps.sets[x], n, exact))
        for x in range(n))
    residuals["phi_inside_cone"] = phi_inside_cone(family, cone, exact, seed=seed)
    residuals["cone_inside_phi"] = cone_inside_phi(cone, family, exact, seed=seed)
    rng = np.random.default_rng(seed)
    mismatches = 0
    for mu, nu in _sample_pairs(family, rng, samples, exact):
        by_cone = order_leq(mu, nu, cone, exact=exact).holds
        by_family = family_reachable(mu, nu, family, exact)
        mismatches += by_cone != by_family
    residuals["order_mismatches"] = float(mismatches)
    tol = 0.0 if exact else 1e-8
    consistent = closure.max_closed and comp[0] and all(v <= tol for v in residuals.values())
    return ConsistencyReport(closure, comp, ps, residuals, consistent, exact,
                             lambda g: phi_membership(g, family, exact=exact))


# ---------------------------------------------------------------- design


@dataclass
class DesignReport:
    value: object
    nu: Measure
    fhat: np.ndarray
    iterations: int
    converged: bool
    composition_closed: bool
    certificate: dict = field(default_factory=dict)


def constrained_envelope(f, family: KernelFamily, exact: bool = False, depth: int = 64, tol: float = 1e-12,
                         one_shot: bool = False):
    """Iterate f_{k+1}(x) = max_{eta in P_x} int f_k deta from f_0 = f.

    Returns (fhat, per-stage optimal kernels, iterations, converged).
    """
    grid = family.grid
    cur = rational_array(f) if exact else np.asarray(f, dtype=float)
    kernels = []
    converged = False
    it = 0
    for it in range(1, depth + 1):
        rows, nxt = [], cur.copy()
        for x, s in enumerate(family.sets):
            val, eta = s.maximize(cur, exact)
            nxt[x] = val
            rows.append(eta)
        kernels.append(Kernel(grid, np.array(rows, dtype=object if exact else float)))
        delta = max(abs(float(a - b)) for a, b in zip(nxt, cur))
        cur = nxt
        if one_shot:
            converged = True
            break
        if delta <= (0 if exact else tol):
            converged = True
            break
    return cur, kernels, it, converged


def constrained_design(f, prior_x: int, family: KernelFamily, exact: bool = False, depth: int = 64,
                       tol: float = 1e-12) -> DesignReport:
    """Best posterior distribution reachable from delta_prior through the family."""
    grid = family.grid
    closed, _ = composition_closure_check(family, exact=exact)
    fv = rational_array(f) if exact else np.asarray(f, dtype=float)
    fhat, kernels, it, converged = constrained_envelope(fv, family, exact, depth, tol)
    # realized posterior distribution: apply the stage kernels, last-computed first
    nu = dirac(grid, prior_x, exact)
    for K in reversed(kernels):
        nu = push(K, nu)
    value = fhat[prior_x]
    ctol = 0 if exact else 1e-8
    support = nu.support() if exact else nu.support(1e-12)
    cert = {
        "support_in_contact": all(abs(float(fhat[y] - fv[y])) <= max(ctol, 1e-8 if not exact else 0) for y in support),
        "value_matches": abs(float(nu.integrate(fv) - value)) <= (0 if exact else 1e-8),
        "one_shot": closed,
    }
    if closed and not converged:
        converged = True
    return DesignReport(value, nu, fhat, it, converged, closed, cert)


@dataclass
class ComparisonReport:
    value_eliminating: bool
    eliminating_prior: int | None
    kg: Measure
    constrained: Measure
    kg_dominates_constrained: bool
    constrained_dominates_kg: bool
    strictly_dominated: bool
    binary_state: bool
    dichotomy_holds: bool


def blackwell_dominates(a: Measure, b: Measure, exact: bool = False) -> bool:
    """Posterior distribution a is more informative than b (a is a mean-preserving spread of b)."""
    return strassen_coupling(b, a, CONCAVE, exact=exact).found


def constrained_vs_kg(f, prior_x: int, family: KernelFamily, exact: bool = False, tol: float = 1e-9) -> ComparisonReport:
    grid = family.grid
    fv = np.asarray(f, dtype=float)
    closed, _ = composition_closure_check(family)
    if not closed:
        raise InapplicableError("the family is not composition-closed")
    unique, found = unique_optimizer_check(fv, dirac(grid, prior_x), CONCAVE)
    if not unique:
        raise InapplicableError("the unconstrained optimum is not unique at this prior")
    kg = found[0]
    fhat, _, _, _ = constrained_envelope(fv, family, depth=64)
    cav = concavification(fv, grid)
    elim = [x for x in range(len(grid)) if fhat[x] <= fv[x] + tol and cav[x] > fv[x] + tol]
    design = constrained_design(fv, prior_x, family)
    kg_dom = blackwell_dominates(kg, design.nu, exact)
    c_dom = blackwell_dominates(design.nu, kg, exact)
    strict = kg_dom and not c_dom
    binary = grid.dim == 1 or (grid.simplex_flag and grid.dim == 2)
    holds = bool(elim) or (not strict and (c_dom or not binary))
    return ComparisonReport(bool(elim), elim[0] if elim else None, kg, design.nu, kg_dom, c_dom, strict, binary, holds)
