"""Finite grids, discrete measures and transition kernels.

Weights may be floats or exact rationals (``fractions.Fraction`` stored in an
object array). Arithmetic helpers below keep whichever representation they
are given, so exact pipelines never silently drop to floating point.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionError, PreconditionError, ValidationError

NORMALIZE_TOL = 1e-8
SIMPLEX_TOL = 1e-12


def to_rational(x) -> Fraction:
    """Exact rational for a number. Floats go through their decimal repr."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    return Fraction(repr(float(x)))


def rational_array(values) -> np.ndarray:
    arr = np.asarray(values, dtype=object)
    out = np.empty(arr.shape, dtype=object)
    for idx, v in np.ndenumerate(arr):
        out[idx] = to_rational(v)
    return out


def is_exact(arr) -> bool:
    a = np.asarray(arr)
    return a.dtype == object


def as_float(arr) -> np.ndarray:
    return np.asarray(arr, dtype=float)


class Grid:
    """Ordered finite point set in R^d.

    ``rational_points`` holds an exact copy of the coordinates used by the
    exact LP backend; it is built from Fractions when given, otherwise from
    the decimal representation of each float.
    """

    def __init__(self, points, simplex: bool = False):
        raw = np.asarray(points, dtype=object)
        if raw.ndim == 1:
            raw = raw.reshape(-1, 1)
        if raw.ndim != 2 or raw.shape[0] == 0:
            raise ValidationError("grid needs a non-empty list of points")
        self.rational_points = rational_array(raw)
        self.points = self.rational_points.astype(float)
        self.dim = self.points.shape[1]
        self.simplex_flag = bool(simplex)
        if len({tuple(p) for p in self.rational_points.tolist()}) != len(self.points):
            raise ValidationError("grid points must be pairwise distinct")
        if simplex:
            if np.any(self.points < -SIMPLEX_TOL) or np.any(
                np.abs(self.points.sum(axis=1) - 1.0) > SIMPLEX_TOL
            ):
                raise ValidationError("simplex grid points must be probability vectors")
        p = self.points
        self.partial_order = np.all(p[:, None, :] <= p[None, :, :], axis=2)

    def __len__(self) -> int:
        return len(self.points)

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        if not isinstance(other, Grid):
            return NotImplemented
        return self.points.shape == other.points.shape and bool(
            np.all(self.rational_points == other.rational_points)
        )

    def __hash__(self):
        return hash(tuple(map(tuple, self.points.tolist())))

    def coords(self, exact: bool = False) -> np.ndarray:
        return self.rational_points if exact else self.points

    def index_of(self, point, tol: float = 1e-12) -> int:
        target = np.asarray(point, dtype=float).reshape(-1)
        hits = np.nonzero(np.all(np.abs(self.points - target) <= tol, axis=1))[0]
        if len(hits) == 0:
            raise ValidationError(f"point {target.tolist()} is not on the grid")
        return int(hits[0])

    def leq(self, i: int, j: int) -> bool:
        return bool(self.partial_order[i, j])

    def to_json(self) -> dict:
        return {"points": self.points.tolist(), "simplex": self.simplex_flag}

    @classmethod
    def from_json(cls, doc) -> "Grid":
        if "points" not in doc:
            raise ValidationError("grid document lacks 'points'")
        return cls(doc["points"], simplex=bool(doc.get("simplex", False)))

    def __repr__(self):
        return f"Grid(n={len(self)}, dim={self.dim}, simplex={self.simplex_flag})"


def line_grid(values: Iterable) -> Grid:
    return Grid([[v] for v in values])


def uniform_line_grid(n: int, lo=0, hi=1) -> Grid:
    """n equally spaced rational points on [lo, hi]."""
    lo, hi = to_rational(lo), to_rational(hi)
    if n == 1:
        return line_grid([lo])
    return line_grid([lo + (hi - lo) * Fraction(i, n - 1) for i in range(n)])


def simplex_grid(n_states: int, resolution: int) -> Grid:
    """All points of the probability simplex with coordinates in {0, 1/k, ..., 1}."""
    k = resolution
    pts = []
    for combo in itertools.product(range(k + 1), repeat=n_states - 1):
        s = sum(combo)
        if s <= k:
            counts = list(combo) + [k - s]
            pts.append([Fraction(c, k) for c in counts])
    pts.sort(key=lambda p: tuple(p))
    return Grid(pts, simplex=True)


def _check_weights(weights, what: str):
    exact = is_exact(weights)
    w = rational_array(weights) if exact else np.asarray(weights, dtype=float)
    if exact:
        if any(v < 0 for v in w.flat):
            raise ValidationError(f"{what} has negative entries")
    else:
        if not np.all(np.isfinite(w)):
            raise ValidationError(f"{what} has non-finite entries")
        if np.any(w < -1e-12):
            raise ValidationError(f"{what} has negative entries")
        w = np.clip(w, 0.0, None)
    return w, exact


def _normalize_vector(w, exact: bool, what: str):
    s = w.sum()
    if exact:
        if s == 1:
            return w
        if abs(float(s) - 1.0) > NORMALIZE_TOL:
            raise ValidationError(f"{what} sums to {float(s)}, not 1")
        return w / s
    if abs(s - 1.0) > NORMALIZE_TOL:
        raise ValidationError(f"{what} sums to {s}, not 1")
    return w / s


class Measure:
    """Probability weights on a grid."""

    def __init__(self, grid: Grid, weights):
        w, exact = _check_weights(weights, "measure")
        if w.shape != (len(grid),):
            raise DimensionError(f"expected {len(grid)} weights, got shape {w.shape}")
        self.grid = grid
        self.weights = _normalize_vector(w, exact, "measure")
        self.exact = exact

    def __len__(self):
        return len(self.weights)

    def barycenter(self) -> np.ndarray:
        return self.weights @ self.grid.coords(self.exact)

    def support(self, tol: float = 0.0) -> list[int]:
        if self.exact:
            return [i for i, v in enumerate(self.weights) if v != 0]
        return [int(i) for i in np.nonzero(self.weights > tol)[0]]

    def integrate(self, g) -> float:
        return self.weights @ np.asarray(g, dtype=object if self.exact else float)

    def to_float(self) -> "Measure":
        return Measure(self.grid, self.weights.astype(float)) if self.exact else self

    def to_exact(self) -> "Measure":
        return self if self.exact else Measure(self.grid, rational_array(self.weights))

    def mix(self, other: "Measure", alpha) -> "Measure":
        _same_grid(self.grid, other.grid)
        if self.exact and other.exact:
            a = to_rational(alpha)
            return Measure(self.grid, a * self.weights + (1 - a) * other.weights)
        a = float(alpha)
        return Measure(self.grid, a * as_float(self.weights) + (1 - a) * as_float(other.weights))

    def close_to(self, other: "Measure", tol: float = 1e-9) -> bool:
        return bool(np.max(np.abs(as_float(self.weights) - as_float(other.weights))) <= tol)

    def to_json(self) -> dict:
        return {"points": self.grid.points.tolist(), "weights": [float(v) for v in self.weights]}

    @classmethod
    def from_json(cls, doc, grid: Grid | None = None) -> "Measure":
        if "weights" not in doc:
            raise ValidationError("measure document lacks 'weights'")
        g = grid if grid is not None else Grid.from_json(doc)
        return cls(g, doc["weights"])

    def __repr__(self):
        terms = [f"{float(self.weights[i]):.4g}@{self.grid.points[i].tolist()}" for i in self.support(1e-12)]
        return "Measure(" + ", ".join(terms) + ")"


def dirac(grid: Grid, index: int, exact: bool = False) -> Measure:
    w = np.zeros(len(grid), dtype=object if exact else float)
    if exact:
        w[:] = Fraction(0)
        w[index] = Fraction(1)
    else:
        w[index] = 1.0
    return Measure(grid, w)


def uniform(grid: Grid, exact: bool = False) -> Measure:
    n = len(grid)
    if exact:
        return Measure(grid, np.array([Fraction(1, n)] * n, dtype=object))
    return Measure(grid, np.full(n, 1.0 / n))


class Kernel:
    """Row-stochastic matrix indexed by grid points."""

    def __init__(self, grid: Grid, rows):
        r, exact = _check_weights(rows, "kernel")
        n = len(grid)
        if r.shape != (n, n):
            raise DimensionError(f"kernel must be {n}x{n}, got {r.shape}")
        for i in range(n):
            r[i] = _normalize_vector(r[i], exact, f"kernel row {i}")
        self.grid = grid
        self.rows = r
        self.exact = exact

    def row_measure(self, i: int) -> Measure:
        return Measure(self.grid, self.rows[i])

    def to_json(self) -> dict:
        return {"points": self.grid.points.tolist(), "rows": [[float(v) for v in row] for row in self.rows]}

    @classmethod
    def from_json(cls, doc, grid: Grid | None = None) -> "Kernel":
        if "rows" not in doc:
            raise ValidationError("kernel document lacks 'rows'")
        g = grid if grid is not None else Grid.from_json(doc)
        return cls(g, doc["rows"])


def identity_kernel(grid: Grid, exact: bool = False) -> Kernel:
    n = len(grid)
    if exact:
        rows = np.full((n, n), Fraction(0), dtype=object)
        for i in range(n):
            rows[i, i] = Fraction(1)
        return Kernel(grid, rows)
    return Kernel(grid, np.eye(n))


def _same_grid(a: Grid, b: Grid):
    if a is not b and a != b:
        raise DimensionError("objects live on different grids")


def _common(a, b):
    """Bring two arrays to a shared representation."""
    if is_exact(a) and is_exact(b):
        return a, b
    return as_float(a), as_float(b)


def push(kernel: Kernel, mu: Measure) -> Measure:
    """Image measure: nu_j = sum_i P[i][j] mu_i."""
    _same_grid(kernel.grid, mu.grid)
    w, rows = _common(mu.weights, kernel.rows)
    return Measure(mu.grid, w @ rows)


def expect(g, kernel: Kernel) -> np.ndarray:
    """Conditional expectation (g*P)(x_i) = sum_j P[i][j] g(x_j)."""
    g = np.asarray(g, dtype=object) if is_exact(g) else np.asarray(g, dtype=float)
    if g.shape != (len(kernel.grid),):
        raise DimensionError(f"function length {g.shape} does not match grid size {len(kernel.grid)}")
    rows, gv = _common(kernel.rows, g)
    return rows @ gv


def compose(p1: Kernel, p2: Kernel) -> Kernel:
    """P1 o P2: first move with P2, then with P1. Rows are P2 @ P1."""
    _same_grid(p1.grid, p2.grid)
    a, b = _common(p2.rows, p1.rows)
    return Kernel(p1.grid, a @ b)


def random_measure(grid: Grid, rng: np.random.Generator, support: Sequence[int] | None = None,
                   exact: bool = False, denominator: int = 12) -> Measure:
    """Random full-support (or given-support) measure; rational when exact."""
    idx = list(range(len(grid))) if support is None else list(support)
    if exact:
        counts = rng.integers(1, denominator, size=len(idx))
        total = int(counts.sum())
        w = np.full(len(grid), Fraction(0), dtype=object)
        for i, c in zip(idx, counts):
            w[i] = Fraction(int(c), total)
        return Measure(grid, w)
    w = np.zeros(len(grid))
    w[idx] = rng.dirichlet(np.ones(len(idx)))
    return Measure(grid, w)


def random_kernel(grid: Grid, rng: np.random.Generator) -> Kernel:
    n = len(grid)
    return Kernel(grid, rng.dirichlet(np.ones(n), size=n))
