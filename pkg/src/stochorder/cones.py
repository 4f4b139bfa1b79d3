"""Test-function cones, their Dirac orbits, and the orders they induce.

A cone C of functions on a grid defines the order  nu <=_C mu  iff
sum g dnu <= sum g dmu for every g in C. Constants (both signs) are always
in C, so comparable measures have equal mass.

Each named kind has a closed-form orbit {eta : eta <=_C delta_x}:

    kind                 orbit                          negated orbit
    concave              mean(eta) = x                  {delta_x}
    convex               {delta_x}                      mean(eta) = x
    nondecreasing        supp in {y <= x}               supp in {y >= x}
    nonincreasing        supp in {y >= x}               supp in {y <= x}
    increasing_concave   mean(eta) <= x   (d = 1)       supp in {y >= x}
    partition_concave    mean = x, supp in slice(x)     {delta_x}

Custom cones are given by generator vectors; their orbit is cut out by one
inequality per generator.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import DimensionError, UnsupportedError, ValidationError
from .lp import LinearProgram, Status, solve_lp
from .measure import Grid, Kernel, Measure, as_float, rational_array


class ConeKind(str, Enum):
    CONCAVE = "concave"
    CONVEX = "convex"
    NONDECREASING = "nondecreasing"
    NONINCREASING = "nonincreasing"
    INCREASING_CONCAVE = "increasing_concave"
    PARTITION_CONCAVE = "partition_concave"
    CUSTOM = "custom"


@dataclass(frozen=True)
class ConeSpec:
    kind: ConeKind
    generators: tuple | None = None
    partition: tuple | None = None
    negated: bool = False

    def __post_init__(self):
        object.__setattr__(self, "kind", ConeKind(self.kind))
        if self.kind == ConeKind.CUSTOM:
            if self.generators is None:
                raise ValidationError("custom cone needs generators")
            gens = tuple(tuple(g) for g in self.generators)
            if any(len(g) != len(gens[0]) for g in gens):
                raise ValidationError("custom generators must share one length")
            object.__setattr__(self, "generators", gens)
        if self.kind == ConeKind.PARTITION_CONCAVE:
            if self.partition is None:
                raise ValidationError("partition_concave cone needs a partition")
            object.__setattr__(self, "partition", tuple(tuple(int(i) for i in b) for b in self.partition))

    @classmethod
    def named(cls, kind: str, negated: bool = False) -> "ConeSpec":
        return cls(ConeKind(kind), negated=negated)

    @classmethod
    def custom(cls, generators, negated: bool = False) -> "ConeSpec":
        return cls(ConeKind.CUSTOM, generators=tuple(tuple(g) for g in generators), negated=negated)

    @classmethod
    def partition_concave(cls, partition, negated: bool = False) -> "ConeSpec":
        return cls(ConeKind.PARTITION_CONCAVE, partition=partition, negated=negated)

    def negate(self) -> "ConeSpec":
        return ConeSpec(self.kind, self.generators, self.partition, not self.negated)

    def base(self) -> "ConeSpec":
        return ConeSpec(self.kind, self.generators, self.partition, False)

    def check_grid(self, grid: Grid):
        n = len(grid)
        if self.kind == ConeKind.CUSTOM and len(self.generators[0]) != n:
            raise DimensionError(f"generators have length {len(self.generators[0])}, grid has {n} points")
        if self.kind == ConeKind.PARTITION_CONCAVE:
            flat = sorted(i for b in self.partition for i in b)
            if flat != list(range(n)):
                raise ValidationError("partition blocks must cover every grid index exactly once")
        if self.kind == ConeKind.INCREASING_CONCAVE and grid.dim != 1:
            raise UnsupportedError("increasing_concave cone needs a one-dimensional grid")

    def slice_of(self, x: int) -> tuple:
        for block in self.partition:
            if x in block:
                return block
        raise ValidationError(f"index {x} not covered by partition")

    def to_json(self) -> dict:
        return {
            "kind": self.kind.value,
            "generators": [list(map(float, g)) for g in self.generators] if self.generators else None,
            "partition": [list(b) for b in self.partition] if self.partition else None,
            "negated": self.negated,
        }

    @classmethod
    def from_json(cls, doc) -> "ConeSpec":
        if "kind" not in doc:
            raise ValidationError("cone document lacks 'kind'")
        try:
            kind = ConeKind(doc["kind"])
        except ValueError as exc:
            raise ValidationError(f"unknown cone kind {doc['kind']!r}") from exc
        return cls(kind, doc.get("generators"), doc.get("partition"), bool(doc.get("negated", False)))

    def __str__(self):
        return ("-" if self.negated else "") + self.kind.value


CONCAVE = ConeSpec(ConeKind.CONCAVE)
CONVEX = ConeSpec(ConeKind.CONVEX)
NONDECREASING = ConeSpec(ConeKind.NONDECREASING)
NONINCREASING = ConeSpec(ConeKind.NONINCREASING)
INCREASING_CONCAVE = ConeSpec(ConeKind.INCREASING_CONCAVE)


# orbit shape of each (kind, negated) pair
_ORBIT_SHAPE = {
    (ConeKind.CONCAVE, False): "mean",
    (ConeKind.CONCAVE, True): "dirac",
    (ConeKind.CONVEX, False): "dirac",
    (ConeKind.CONVEX, True): "mean",
    (ConeKind.NONDECREASING, False): "below",
    (ConeKind.NONDECREASING, True): "above",
    (ConeKind.NONINCREASING, False): "above",
    (ConeKind.NONINCREASING, True): "below",
    (ConeKind.INCREASING_CONCAVE, False): "mean_at_most",
    (ConeKind.INCREASING_CONCAVE, True): "above",
    (ConeKind.PARTITION_CONCAVE, False): "slice_mean",
    (ConeKind.PARTITION_CONCAVE, True): "dirac",
    (ConeKind.CUSTOM, False): "custom",
    (ConeKind.CUSTOM, True): "custom",
}

# (min_closed, max_closed) of the named kinds, before negation
_CLOSURE = {
    ConeKind.CONCAVE: (True, False),
    ConeKind.CONVEX: (False, True),
    ConeKind.NONDECREASING: (True, True),
    ConeKind.NONINCREASING: (True, True),
    ConeKind.INCREASING_CONCAVE: (True, False),
    ConeKind.PARTITION_CONCAVE: (True, False),
}


def orbit_shape(cone: ConeSpec) -> str:
    return _ORBIT_SHAPE[(cone.kind, cone.negated)]


@dataclass
class OrbitPolyhedron:
    """{eta : eta <=_C delta_x} as linear rows over measure weights.

    Rows act on eta; the probability constraints (eta >= 0, sum eta = 1) are
    implicit. ``support_mask[y]`` is False where eta must vanish.
    """

    base_point: int
    eq_rows: np.ndarray
    eq_rhs: np.ndarray
    ineq_rows: np.ndarray
    ineq_rhs: np.ndarray
    support_mask: np.ndarray
    exact: bool = False

    @property
    def n(self) -> int:
        return len(self.support_mask)

    def allowed(self) -> list[int]:
        return [int(i) for i in np.nonzero(self.support_mask)[0]]

    def to_lp(self, objective, maximize: bool = True) -> LinearProgram:
        """Program over the allowed coordinates only (see ``allowed``)."""
        idx = self.allowed()
        one = Fraction(1) if self.exact else 1.0
        obj = np.asarray(objective, dtype=object if self.exact else float)[idx]
        eq = [np.array([one] * len(idx), dtype=object if self.exact else float)]
        rhs = [one]
        for r, b in zip(self.eq_rows, self.eq_rhs):
            eq.append(r[idx])
            rhs.append(b)
        G = self.ineq_rows[:, idx] if len(self.ineq_rows) else None
        h = self.ineq_rhs if len(self.ineq_rows) else None
        return LinearProgram(obj, np.array(eq), np.array(rhs), G, h, maximize=maximize)

    def full_lp(self, objective, maximize: bool = True) -> LinearProgram:
        """Program over all n coordinates; masked ones get upper bound 0."""
        one = Fraction(1) if self.exact else 1.0
        dt = object if self.exact else float
        eq = [np.array([one] * self.n, dtype=dt)] + [r for r in self.eq_rows]
        rhs = [one] + list(self.eq_rhs)
        upper = [np.inf if m else 0 for m in self.support_mask]
        G = self.ineq_rows if len(self.ineq_rows) else None
        h = self.ineq_rhs if len(self.ineq_rows) else None
        return LinearProgram(np.asarray(objective, dtype=dt), np.array(eq, dtype=dt), np.array(rhs, dtype=dt),
                             G, h, upper=upper, maximize=maximize)

    def contains(self, eta, tol: float = 1e-9) -> bool:
        w = np.asarray(eta, dtype=object if self.exact else float)
        t = 0 if self.exact else tol
        if any(v < -t for v in w) or abs(sum(w) - 1) > t:
            return False
        if any(abs(v) > t for v in w[~self.support_mask]):
            return False
        if len(self.eq_rows) and np.max(np.abs(as_float(self.eq_rows @ w - self.eq_rhs))) > tol:
            return False
        if len(self.ineq_rows) and np.max(as_float(self.ineq_rows @ w - self.ineq_rhs)) > tol:
            return False
        return True

    def maximize(self, g, exact: bool | None = None):
        """(max of sum g deta over the orbit, an optimal eta on the full grid)."""
        sol = solve_lp(self.to_lp(g), exact=self.exact if exact is None else exact)
        if sol.status != Status.OPTIMAL:
            raise AssertionError(f"orbit program not optimal: {sol.status}")
        eta = np.zeros(self.n, dtype=object if sol.exact else float)
        if sol.exact:
            eta[:] = Fraction(0)
        eta[self.allowed()] = sol.primal
        return sol.value, eta, sol


def _coord_rows(grid: Grid, idx, exact: bool) -> np.ndarray:
    """Coordinate functions used to pin a barycenter (one redundant one dropped on simplex grids)."""
    P = grid.coords(exact)
    cols = P.shape[1] - 1 if grid.simplex_flag and P.shape[1] > 1 else P.shape[1]
    return np.array([P[:, k] for k in range(cols)], dtype=object if exact else float)


def dirac_orbit(cone: ConeSpec, grid: Grid, x: int, exact: bool = False) -> OrbitPolyhedron:
    cone.check_grid(grid)
    n = len(grid)
    dt = object if exact else float
    empty = np.zeros((0, n), dtype=dt)
    none = np.zeros(0, dtype=dt)
    mask = np.ones(n, dtype=bool)
    shape = orbit_shape(cone)
    P = grid.coords(exact)
    if shape == "dirac":
        mask[:] = False
        mask[x] = True
        return OrbitPolyhedron(x, empty, none, empty, none, mask, exact)
    if shape == "mean":
        rows = _coord_rows(grid, None, exact)
        return OrbitPolyhedron(x, rows, np.array([r[x] for r in rows], dtype=dt), empty, none, mask, exact)
    if shape == "below":
        mask = grid.partial_order[:, x].copy()
        return OrbitPolyhedron(x, empty, none, empty, none, mask, exact)
    if shape == "above":
        mask = grid.partial_order[x, :].copy()
        return OrbitPolyhedron(x, empty, none, empty, none, mask, exact)
    if shape == "mean_at_most":
        row = np.array([P[:, 0]], dtype=dt)
        return OrbitPolyhedron(x, empty, none, row, np.array([P[x, 0]], dtype=dt), mask, exact)
    if shape == "slice_mean":
        mask[:] = False
        mask[list(cone.slice_of(x))] = True
        rows = _coord_rows(grid, None, exact)
        return OrbitPolyhedron(x, rows, np.array([r[x] for r in rows], dtype=dt), empty, none, mask, exact)
    if shape == "custom":
        G = rational_array(cone.generators) if exact else np.asarray(cone.generators, dtype=float)
        if cone.negated:
            G = -G
        return OrbitPolyhedron(x, empty, none, G, G[:, x].copy(), mask, exact)
    raise UnsupportedError(f"no orbit for cone {cone}")


# ---------------------------------------------------------------- generators


def _hinge(t: np.ndarray, knot) -> np.ndarray:
    return np.array([max(v - knot, 0) for v in t], dtype=t.dtype)


def _line_param(grid: Grid, idx: Sequence[int], exact: bool):
    """Scalar parameter along a collinear subset of the grid, or None."""
    P = grid.coords(exact)[list(idx)]
    if len(idx) == 1:
        return np.array([0 if not exact else Fraction(0)], dtype=P.dtype)
    base = P[0]
    diffs = P - base
    far = int(np.argmax(np.abs(as_float(diffs)).sum(axis=1)))
    direction = diffs[far]
    k = int(np.argmax(np.abs(as_float(direction))))
    t = diffs[:, k] / direction[k]
    recon = np.array([base + ti * direction for ti in t])
    if np.max(np.abs(as_float(recon - P))) > (0 if exact else 1e-12):
        return None
    return t


def _upset_indicators(grid: Grid, lower: bool) -> list[np.ndarray]:
    n = len(grid)
    if grid.dim == 1:
        order = np.argsort(grid.points[:, 0])
        out = []
        for k in range(1, n):
            g = np.zeros(n)
            if lower:
                g[order[:k]] = 1.0
            else:
                g[order[k:]] = 1.0
            out.append(g)
        return out
    if n > 16:
        raise UnsupportedError("up-set enumeration limited to 16 points in d > 1")
    le = grid.partial_order
    out = []
    for bits in range(1, 2 ** n - 1):
        members = [(bits >> i) & 1 for i in range(n)]
        ok = True
        for i in range(n):
            if not members[i]:
                continue
            for j in range(n):
                # up-set: i in S and i <= j  => j in S ; down-set: j <= i => j in S
                if (le[j, i] if lower else le[i, j]) and not members[j]:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            out.append(np.array(members, dtype=float))
    return out


def generator_matrix(cone: ConeSpec, grid: Grid, exact: bool = False) -> np.ndarray:
    """Finite generators of the cone (constants are implicit).

    Available for one-dimensional grids, for monotone cones on small posets,
    for partition cones whose slices are collinear, and for custom cones.
    """
    cone.check_grid(grid)
    n = len(grid)
    P = grid.coords(exact)
    kind = cone.kind
    gens: list[np.ndarray] = []
    if kind == ConeKind.CUSTOM:
        G = rational_array(cone.generators) if exact else np.asarray(cone.generators, dtype=float)
        return -G if cone.negated else G
    if kind in (ConeKind.CONCAVE, ConeKind.CONVEX, ConeKind.INCREASING_CONCAVE):
        if grid.dim != 1:
            raise UnsupportedError(f"{kind.value} generators are only enumerable on one-dimensional grids")
        t = P[:, 0]
        order = np.argsort(as_float(t))
        knots = [t[i] for i in order[1:-1]]
        if kind == ConeKind.INCREASING_CONCAVE:
            gens.append(t.copy())
            gens += [np.array([min(v, k) for v in t], dtype=t.dtype) for k in knots]
        else:
            gens += [t.copy(), -t]
            sign = -1 if kind == ConeKind.CONCAVE else 1
            gens += [sign * _hinge(t, k) for k in knots]
    elif kind in (ConeKind.NONDECREASING, ConeKind.NONINCREASING):
        gens = _upset_indicators(grid, lower=(kind == ConeKind.NONINCREASING))
        if exact:
            gens = [rational_array(g) for g in gens]
    elif kind == ConeKind.PARTITION_CONCAVE:
        zero = Fraction(0) if exact else 0.0
        for block in cone.partition:
            t = _line_param(grid, block, exact)
            if t is None:
                raise UnsupportedError("partition generators need collinear slices")
            ind = np.full(n, zero, dtype=object if exact else float)
            ind[list(block)] = 1
            gens += [ind, -ind]
            if len(block) > 1:
                lin = np.full(n, zero, dtype=ind.dtype)
                lin[list(block)] = t
                gens += [lin, -lin]
                order = np.argsort(as_float(t))
                for k in [t[i] for i in order[1:-1]]:
                    h = np.full(n, zero, dtype=ind.dtype)
                    h[list(block)] = -_hinge(t, k)
                    gens.append(h)
    else:
        raise UnsupportedError(f"no generators for {kind}")
    G = np.array(gens, dtype=object if exact else float).reshape(len(gens), n)
    return -G if cone.negated else G


# ---------------------------------------------------------------- closure


def named_closure(cone: ConeSpec) -> tuple[bool, bool] | None:
    if cone.kind == ConeKind.CUSTOM:
        return None
    mn, mx = _CLOSURE[cone.kind]
    return (mx, mn) if cone.negated else (mn, mx)


@dataclass
class ClosureReport:
    label: str
    min_closed: bool
    max_closed: bool
    witness: tuple | None = None   # (g1, g2, "min" | "max")
    trials: int = 0


def sample_member(cone: ConeSpec, grid: Grid, rng: np.random.Generator) -> np.ndarray:
    """Random element of the cone (float)."""
    if cone.negated:
        return -sample_member(cone.base(), grid, rng)
    n, P = len(grid), grid.points
    kind = cone.kind

    def affine(k, nonneg=False):
        a = rng.normal(size=(k, grid.dim))
        if nonneg:
            a = np.abs(a)
        b = rng.normal(size=k)
        return P @ a.T + b

    if kind == ConeKind.CONCAVE:
        return affine(3).min(axis=1)
    if kind == ConeKind.CONVEX:
        return affine(3).max(axis=1)
    if kind == ConeKind.INCREASING_CONCAVE:
        return affine(3, nonneg=True).min(axis=1)
    if kind in (ConeKind.NONDECREASING, ConeKind.NONINCREASING):
        g = np.zeros(n)
        for _ in range(4):
            p = P[rng.integers(n)]
            ind = np.all(P >= p, axis=1) if kind == ConeKind.NONDECREASING else np.all(P <= p, axis=1)
            g += rng.exponential() * ind
        return g + rng.normal()
    if kind == ConeKind.PARTITION_CONCAVE:
        g = np.zeros(n)
        for block in cone.partition:
            g[list(block)] = affine(3)[list(block)].min(axis=1) + rng.normal()
        return g
    G = np.asarray(cone.generators, dtype=float)
    return rng.exponential(size=G.shape[0]) @ G + rng.normal()


def closure_classify(cone: ConeSpec, grid: Grid, trials: int = 200, seed: int = 0) -> ClosureReport:
    """min_closed / max_closed / neither, with a witness pair for a failing operation.

    Named kinds report their known classification; the witness for the
    operation that fails is found by sampling. Custom cones are classified
    purely by sampling pairs and testing membership of their min and max.
    """
    rng = np.random.default_rng(seed)
    known = named_closure(cone)
    n = len(grid)

    def affine_pair():
        a = rng.normal(size=(2, grid.dim))
        b = rng.normal(size=2)
        # make the two pieces cross inside the grid
        g1, g2 = grid.points @ a[0] + b[0], grid.points @ a[1] + b[1]
        mid = grid.points[rng.integers(n)]
        g2 = g2 - (mid @ a[1] + b[1]) + (mid @ a[0] + b[0])
        return g1, g2

    def search(op: str):
        for t in range(trials):
            if t % 2 == 0 and cone.kind != ConeKind.CUSTOM and cone.kind not in (
                    ConeKind.NONDECREASING, ConeKind.NONINCREASING, ConeKind.INCREASING_CONCAVE):
                g1, g2 = affine_pair()
            else:
                g1, g2 = sample_member(cone, grid, rng), sample_member(cone, grid, rng)
            h = np.minimum(g1, g2) if op == "min" else np.maximum(g1, g2)
            if not membership(h, cone, grid):
                return (g1, g2, op)
        return None

    if known is not None:
        mn, mx = known
        witness = None
        if not mn:
            witness = search("min")
        elif not mx:
            witness = search("max")
        label = "min_closed" if mn else ("max_closed" if mx else "neither")
        return ClosureReport(label, mn, mx, witness, trials)
    w_min = search("min")
    w_max = search("max")
    mn, mx = w_min is None, w_max is None
    label = "min_closed" if mn else ("max_closed" if mx else "neither")
    return ClosureReport(label, mn, mx, w_min if w_min is not None else w_max, trials)


@functools.lru_cache(maxsize=256)
def _custom_min_closed(cone: ConeSpec, grid_key: tuple) -> bool:
    grid = Grid(grid_key)
    return closure_classify(cone, grid).min_closed


def is_min_closed(cone: ConeSpec, grid: Grid) -> bool:
    known = named_closure(cone)
    if known is not None:
        return known[0]
    return _custom_min_closed(cone, tuple(map(tuple, grid.points.tolist())))


def is_max_closed(cone: ConeSpec, grid: Grid) -> bool:
    known = named_closure(cone)
    if known is not None:
        return known[1]
    return closure_classify(cone, grid).max_closed


# ---------------------------------------------------------------- membership


def _concave_1d(g, t, tol) -> bool:
    order = np.argsort(t)
    tt, gg = t[order], g[order]
    slopes = np.diff(gg) / np.diff(tt)
    return bool(np.all(np.diff(slopes) <= tol))


def membership(g, cone: ConeSpec, grid: Grid, tol: float = 1e-9) -> bool:
    g = np.asarray(g, dtype=float)
    if g.shape != (len(grid),):
        raise DimensionError("function length does not match grid")
    if cone.negated:
        return membership(-g, cone.base(), grid, tol)
    kind = cone.kind
    P = grid.points
    if kind == ConeKind.CONCAVE:
        if grid.dim == 1:
            return _concave_1d(g, P[:, 0], tol)
        from .envelope import c_envelope

        return bool(np.max(c_envelope(g, grid, cone, fast=False).fbar - g) <= max(tol, 1e-8))
    if kind == ConeKind.CONVEX:
        return membership(-g, ConeSpec(ConeKind.CONCAVE), grid, tol)
    if kind == ConeKind.NONDECREASING:
        diff = g[None, :] - g[:, None]   # g_j - g_i
        return bool(np.all(diff[grid.partial_order] >= -tol))
    if kind == ConeKind.NONINCREASING:
        diff = g[:, None] - g[None, :]
        return bool(np.all(diff[grid.partial_order] >= -tol))
    if kind == ConeKind.INCREASING_CONCAVE:
        return membership(g, NONDECREASING, grid, tol) and _concave_1d(g, P[:, 0], tol)
    if kind == ConeKind.PARTITION_CONCAVE:
        from .envelope import c_envelope

        return bool(np.max(c_envelope(g, grid, cone).fbar - g) <= max(tol, 1e-8))
    return custom_membership(g, np.asarray(cone.generators, dtype=float), tol)


def custom_membership(g, G: np.ndarray, tol: float = 1e-9) -> bool:
    """Is g = sum_k lam_k G_k + c with lam >= 0? (L1 residual LP.)"""
    K, n = G.shape
    # variables: lam (K), c+ c- , e+ (n), e- (n)
    A = np.hstack([G.T, np.ones((n, 1)), -np.ones((n, 1)), np.eye(n), -np.eye(n)])
    obj = np.concatenate([np.zeros(K + 2), np.ones(2 * n)])
    sol = solve_lp(LinearProgram(obj, A, g, maximize=False))
    return sol.optimal and float(sol.value) <= tol * max(1.0, n)


def facet_rows(cone: ConeSpec, grid: Grid, exact: bool = False) -> np.ndarray:
    """Rows M with C = {g : M g >= 0} (constants included), for named kinds with a
    finite difference description on this grid."""
    cone.check_grid(grid)
    n = len(grid)
    kind = cone.kind
    dt = object if exact else float
    zero = Fraction(0) if exact else 0.0

    def blank():
        return np.full(n, zero, dtype=dt)

    def second_diff(idx, t):
        order = sorted(range(len(idx)), key=lambda k: t[k])
        rows = []
        for a, b, c in zip(order[:-2], order[1:-1], order[2:]):
            r = blank()
            # convexity: (g_c - g_b)/(tc - tb) - (g_b - g_a)/(tb - ta) >= 0
            r[idx[c]] += 1 / (t[c] - t[b])
            r[idx[b]] += -1 / (t[c] - t[b]) - 1 / (t[b] - t[a])
            r[idx[a]] += 1 / (t[b] - t[a])
            rows.append(r)
        return rows

    rows: list = []
    if kind in (ConeKind.CONVEX, ConeKind.CONCAVE, ConeKind.INCREASING_CONCAVE):
        if grid.dim != 1:
            raise UnsupportedError(f"no finite facet description of {kind.value} functions in d > 1")
        conv = second_diff(list(range(n)), grid.coords(exact)[:, 0])
        rows = conv if kind == ConeKind.CONVEX else [-r for r in conv]
    if kind in (ConeKind.NONDECREASING, ConeKind.NONINCREASING, ConeKind.INCREASING_CONCAVE):
        for i in range(n):
            for j in range(n):
                if i != j and grid.partial_order[i, j]:
                    r = blank()
                    r[j], r[i] = (1, -1) if kind != ConeKind.NONINCREASING else (-1, 1)
                    rows.append(r)
    if kind == ConeKind.PARTITION_CONCAVE:
        for block in cone.partition:
            block = list(block)
            t = _line_param(grid, block, exact)
            if t is None:
                raise UnsupportedError("facet rows need collinear slices")
            rows += [-r for r in second_diff(block, t)]
    if kind == ConeKind.CUSTOM:
        raise UnsupportedError("custom cones are described by generators, not facets")
    M = np.array(rows, dtype=dt).reshape(len(rows), n)
    return -M if cone.negated else M


# ---------------------------------------------------------------- couplings


@dataclass
class CouplingProgram:
    lp: LinearProgram
    pairs: list            # (x, y) per variable
    rows_of: dict          # x -> list of variable indices
    n_rowsum: int          # number of "row mass" equality rows
    n_orbit_eq: int
    target_rows: list      # equality-row indices of the pushforward constraints (if any)
    sources: list


def coupling_program(mu: Measure, cone: ConeSpec | None, nu: Measure | None = None, objective=None,
                     exact: bool = False, orbit_of=None) -> CouplingProgram:
    """Transport program for kernels whose rows stay in the Dirac orbits.

    Variables gamma(x, y) >= 0 for x in supp(mu) and y allowed by orbit(x).
    Rows: sum_y gamma(x, y) = mu(x); orbit rows scaled by mu(x); optional
    sum_x gamma(x, y) = nu(y). Objective sum f(y) gamma(x, y).
    ``orbit_of(x)`` replaces the cone's orbits by any per-point polyhedra.
    """
    grid = mu.grid
    if nu is not None and nu.grid != grid:
        raise DimensionError("measures live on different grids")
    n = len(grid)
    dt = object if exact else float
    mu_w = mu.to_exact().weights if exact else as_float(mu.weights)
    sources = mu.to_exact().support() if exact else mu.support(0.0)
    if orbit_of is None:
        orbits = {x: dirac_orbit(cone, grid, x, exact) for x in sources}
    else:
        orbits = {x: orbit_of(x) for x in sources}
    pairs, rows_of = [], {}
    for x in sources:
        rows_of[x] = []
        for y in orbits[x].allowed():
            rows_of[x].append(len(pairs))
            pairs.append((x, y))
    N = len(pairs)
    zero = Fraction(0) if exact else 0.0
    eq, eq_rhs, ub, ub_rhs = [], [], [], []
    for x in sources:
        r = np.full(N, zero, dtype=dt)
        r[rows_of[x]] = 1
        eq.append(r)
        eq_rhs.append(mu_w[x])
    n_rowsum = len(eq)
    for x in sources:
        orb = orbits[x]
        ys = [pairs[k][1] for k in rows_of[x]]
        for row, b in zip(orb.eq_rows, orb.eq_rhs):
            r = np.full(N, zero, dtype=dt)
            r[rows_of[x]] = row[ys]
            eq.append(r)
            eq_rhs.append(b * mu_w[x])
    n_orbit_eq = len(eq) - n_rowsum
    for x in sources:
        orb = orbits[x]
        ys = [pairs[k][1] for k in rows_of[x]]
        for row, b in zip(orb.ineq_rows, orb.ineq_rhs):
            r = np.full(N, zero, dtype=dt)
            r[rows_of[x]] = row[ys]
            ub.append(r)
            ub_rhs.append(b * mu_w[x])
    target_rows = []
    if nu is not None:
        nu_w = nu.to_exact().weights if exact else as_float(nu.weights)
        for y in range(n):
            r = np.full(N, zero, dtype=dt)
            for k, (_, yy) in enumerate(pairs):
                if yy == y:
                    r[k] = 1
            target_rows.append(len(eq))
            eq.append(r)
            eq_rhs.append(nu_w[y])
    if objective is None:
        obj = np.full(N, zero, dtype=dt)
    else:
        f = rational_array(objective) if exact else np.asarray(objective, dtype=float)
        obj = np.array([f[y] for (_, y) in pairs], dtype=dt)
    lp = LinearProgram(obj, np.array(eq, dtype=dt).reshape(len(eq), N), np.array(eq_rhs, dtype=dt),
                       np.array(ub, dtype=dt).reshape(len(ub), N) if ub else None,
                       np.array(ub_rhs, dtype=dt) if ub else None)
    return CouplingProgram(lp, pairs, rows_of, n_rowsum, n_orbit_eq, target_rows, sources)


def kernel_from_plan(prog: CouplingProgram, mu: Measure, gamma, exact: bool = False) -> Kernel:
    grid = mu.grid
    n = len(grid)
    mu_w = mu.to_exact().weights if exact else as_float(mu.weights)
    if exact:
        rows = np.full((n, n), Fraction(0), dtype=object)
    else:
        rows = np.zeros((n, n))
    for x in range(n):
        if x not in prog.rows_of:
            rows[x, x] = 1
            continue
        for k in prog.rows_of[x]:
            rows[x, prog.pairs[k][1]] = gamma[k] / mu_w[x]
        if not exact:
            rows[x] = np.clip(rows[x], 0.0, None)
            rows[x] /= rows[x].sum()
    return Kernel(grid, rows)


# ---------------------------------------------------------------- order


@dataclass
class OrderResult:
    holds: bool
    verdict: str                 # "EXACT" or "SOUND_ONLY"
    method: str                  # "coupling", "generators", "sampled"
    kernel: Kernel | None = None
    violating_function: np.ndarray | None = None
    margin: float = 0.0


def order_by_generators(nu: Measure, mu: Measure, G: np.ndarray, exact: bool = False, tol: float = 1e-9) -> OrderResult:
    if exact:
        d = G @ mu.to_exact().weights - G @ nu.to_exact().weights
        mass_ok = sum(nu.to_exact().weights) == sum(mu.to_exact().weights)
        bad = [k for k in range(len(d)) if d[k] < 0]
    else:
        d = G @ as_float(mu.weights) - G @ as_float(nu.weights)
        bad = list(np.nonzero(d < -tol)[0])
    if bad:
        k = min(bad, key=lambda i: float(d[i]))
        return OrderResult(False, "EXACT", "generators", violating_function=G[k], margin=float(-d[k]))
    return OrderResult(True, "EXACT", "generators")


def _sampled_convex_tests(grid: Grid, cone: ConeSpec, rng, count: int) -> np.ndarray:
    P = grid.points
    tests = [P[:, k] for k in range(grid.dim)] + [-P[:, k] for k in range(grid.dim)]
    for _ in range(count):
        a = rng.normal(size=(3, grid.dim))
        b = rng.normal(size=3)
        tests.append((P @ a.T + b).max(axis=1))
    G = np.array(tests)
    # convex cone <-> orbit {delta_x}; the negated convex cone is concave
    concave_like = (cone.kind == ConeKind.CONVEX and cone.negated) or (cone.kind == ConeKind.CONCAVE and not cone.negated)
    return -G if concave_like else G


def order_leq(nu: Measure, mu: Measure, cone: ConeSpec, exact: bool = False, samples: int = 256,
              seed: int = 0) -> OrderResult:
    """Decide nu <=_C mu.

    Min-closed cones: feasibility of a coupling whose rows stay in the Dirac
    orbits (certificate: the kernel; on failure a separating generator when
    one is available). Other cones: the generator inequalities, or sampled
    max-affine tests flagged SOUND_ONLY when no finite generator set exists.
    """
    if nu.grid != mu.grid:
        raise DimensionError("measures live on different grids")
    grid = mu.grid
    cone.check_grid(grid)
    if is_min_closed(cone, grid):
        prog = coupling_program(mu, cone, nu=nu, exact=exact)
        sol = solve_lp(prog.lp, exact=exact)
        if sol.optimal:
            return OrderResult(True, "EXACT", "coupling", kernel=kernel_from_plan(prog, mu, sol.primal, exact))
        witness = None
        try:
            witness = order_by_generators(nu, mu, generator_matrix(cone, grid, exact), exact).violating_function
        except UnsupportedError:
            y = sol.dual
            if y is not None:
                witness = -np.asarray([y[i] for i in prog.target_rows], dtype=float)
        return OrderResult(False, "EXACT", "coupling", violating_function=witness)
    try:
        G = generator_matrix(cone, grid, exact)
    except UnsupportedError:
        if cone.kind in (ConeKind.CONVEX, ConeKind.CONCAVE):
            rng = np.random.default_rng(seed)
            res = order_by_generators(nu, mu, _sampled_convex_tests(grid, cone, rng, samples))
            res.verdict, res.method = "SOUND_ONLY", "sampled"
            return res
        raise
    return order_by_generators(nu, mu, G, exact)
