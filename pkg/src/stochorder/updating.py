"""Distorted belief updating on the interior of the simplex.

A rule maps a prior x and a Bayesian posterior y to a reported belief d(x, y).
``d_hat`` re-expresses the rule for an agent whose prior x_D differs from the
Bayesian prior x_B; ``d_two_stage`` chains two updates. A rule is divisible
when chaining never differs from updating once.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .envelope import upper_hull
from .errors import BoundaryError, ValidationError
from .measure import Grid

BOUNDARY_TOL = 1e-9


def _check_interior(*beliefs):
    for b in beliefs:
        if np.any(np.asarray(b) < BOUNDARY_TOL):
            raise BoundaryError(f"belief {np.asarray(b).tolist()} touches the simplex boundary")


def _normalize(v):
    v = np.asarray(v, dtype=float)
    return v / v.sum(axis=-1, keepdims=True)


@dataclass(frozen=True)
class UpdateRule:
    kind: str                 # "bayes" | "power" | "grether" | "custom"
    alpha: float = 1.0
    beta: float = 1.0
    grid: Grid | None = field(default=None, compare=False)
    table: np.ndarray | None = field(default=None, compare=False)   # [i, j] -> d(grid_i, grid_j)

    def __post_init__(self):
        if self.kind not in ("bayes", "power", "grether", "custom"):
            raise ValidationError(f"unknown updating rule {self.kind!r}")
        if self.kind == "custom" and (self.grid is None or self.table is None):
            raise ValidationError("custom rule needs a grid and a table")

    @classmethod
    def bayes(cls):
        return cls("bayes")

    @classmethod
    def power(cls, beta: float):
        return cls("power", 1.0, float(beta))

    @classmethod
    def grether(cls, alpha: float, beta: float):
        return cls("grether", float(alpha), float(beta))

    def __call__(self, x, y) -> np.ndarray:
        x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        if self.kind == "bayes":
            return _normalize(y)
        if self.kind in ("power", "grether"):
            a = 1.0 if self.kind == "power" else self.alpha
            return _normalize(x ** (a - self.beta) * y ** self.beta)
        i, j = self.grid.index_of(x, 1e-9), self.grid.index_of(y, 1e-9)
        return np.asarray(self.table[i, j], dtype=float)

    def identity_residual(self, grid: Grid) -> float:
        """max_x |d(x, x) - x| over the grid."""
        return max(float(np.max(np.abs(self(p, p) - p))) for p in grid.points)

    def to_json(self) -> dict:
        out = {"kind": self.kind}
        if self.kind == "power":
            out["beta"] = self.beta
        if self.kind == "grether":
            out.update(alpha=self.alpha, beta=self.beta)
        return out

    @classmethod
    def from_json(cls, doc) -> "UpdateRule":
        kind = doc.get("kind")
        if kind == "bayes":
            return cls.bayes()
        if kind == "power":
            return cls.power(float(doc["beta"]))
        if kind == "grether":
            return cls.grether(float(doc["alpha"]), float(doc["beta"]))
        if kind == "custom":
            grid = Grid.from_json(doc["grid"])
            return cls("custom", grid=grid, table=np.asarray(doc["table"], dtype=float))
        raise ValidationError(f"unknown updating rule {kind!r}")


def d_hat(rule: UpdateRule, x_b, x_d, y) -> np.ndarray:
    """Report of an agent with prior x_d when the Bayesian posterior from prior x_b is y."""
    _check_interior(x_b, x_d, y)
    return _d_hat(rule, x_b, x_d, y)


def _d_hat(rule, x_b, x_d, y):
    # unchecked: intermediate beliefs may drift close to the boundary without leaving the open simplex
    x_b, x_d, y = (np.asarray(v, dtype=float) for v in (x_b, x_d, y))
    return rule(x_d, _normalize(x_d / x_b * y))


def d_two_stage(rule: UpdateRule, x, z, y) -> np.ndarray:
    """Two updates: first to y, then on to z."""
    _check_interior(x, z, y)
    return _d_hat(rule, y, rule(x, y), z)


def interior_binary_grid(resolution: int, eps: float = 1e-3) -> Grid:
    p = np.linspace(eps, 1 - eps, resolution + 1)
    return Grid(np.column_stack([1 - p, p]), simplex=True)


@dataclass
class DivisibilityReport:
    divisible: bool
    max_residual: float
    witness: tuple | None


def divisibility_check(rule: UpdateRule, grid: Grid, tol: float = 1e-10) -> DivisibilityReport:
    """max over grid triples (x, y, z) of |d_II(x, z; y) - d(x, z)|."""
    worst, witness = 0.0, None
    P = grid.points
    for x, y, z in itertools.product(range(len(P)), repeat=3):
        r = float(np.max(np.abs(d_two_stage(rule, P[x], P[z], P[y]) - rule(P[x], P[z]))))
        if r > worst:
            worst, witness = r, (P[x].tolist(), P[y].tolist(), P[z].tolist())
    return DivisibilityReport(worst <= tol, worst, witness)


def stage_composition_check(rule: UpdateRule, grid: Grid, tol: float = 1e-10):
    """Do two belief moves compose into one? max |d_hat(y, d_hat(x_b, x_d, y), z) - d_hat(x_b, x_d, z)|.

    Returns (closed, residual, witness (x_b, x_d, y, z)).
    """
    P = grid.points
    worst, witness = 0.0, None
    for b, d, y, z in itertools.product(range(len(P)), repeat=4):
        mid = _d_hat(rule, P[b], P[d], P[y])
        r = float(np.max(np.abs(_d_hat(rule, P[y], mid, P[z]) - _d_hat(rule, P[b], P[d], P[z]))))
        if r > worst:
            worst, witness = r, tuple(P[k].tolist() for k in (b, d, y, z))
    return worst <= tol, worst, witness


# ---------------------------------------------------------------- dynamic value


def _concave_hull_at(t, v, t0) -> float:
    """Upper concave hull of the points (t, v) evaluated at t0 (inside their range)."""
    hull = upper_hull(list(t), list(v))
    if len(hull) == 1:
        return float(v[hull[0]])
    for a, b in zip(hull[:-1], hull[1:]):
        if t[a] - 1e-15 <= t0 <= t[b] + 1e-15:
            lam = (t[b] - t0) / (t[b] - t[a])
            return float(lam * v[a] + (1 - lam) * v[b])
    raise ValidationError("prior lies outside the belief grid")


def _param(grid: Grid):
    if not (grid.simplex_flag and grid.dim == 2):
        raise ValidationError("dynamic values are computed on binary-state simplex grids")
    return grid.points[:, 1]


def stage_value(g, rule: UpdateRule, grid: Grid, x_b, x_d) -> float:
    """One more round of Bayes-plausible information before acting on g.

    max(g(x_b, x_d), cav_y[g(y, d_hat(x_b, x_d, y))](x_b)); the first term is
    the option of sending no signal.
    """
    t = _param(grid)
    vals = [g(p, _d_hat(rule, x_b, x_d, p)) for p in grid.points]
    return max(g(np.asarray(x_b), np.asarray(x_d)), _concave_hull_at(t, vals, float(x_b[1])))


def stage_iterate(f, rule: UpdateRule, grid: Grid, k: int):
    """W_k as a callable: W_0 = f, W_{j+1}(x_b, x_d) = stage_value(W_j, ...)."""
    def lift(g):
        return lambda xb, xd: stage_value(g, rule, grid, xb, xd)

    w = f
    for _ in range(k):
        w = lift(w)
    return w


@dataclass
class GapReport:
    w1: float
    w2: float
    gap: float


def dynamic_value_gap(rule: UpdateRule, f, x_b, x_d, grid: Grid) -> GapReport:
    _check_interior(x_b, x_d)
    w1 = stage_iterate(f, rule, grid, 1)(np.asarray(x_b, float), np.asarray(x_d, float))
    w2 = stage_iterate(f, rule, grid, 2)(np.asarray(x_b, float), np.asarray(x_d, float))
    return GapReport(w1, w2, w2 - w1)


def payoff_dictionary(seed: int = 0, n_random: int = 32):
    """Piecewise-linear sender payoffs f(y, d): the receiver acts on the reported belief d,
    the sender's payoff is affine in the Bayesian posterior y on each side of the threshold."""
    thresholds = np.linspace(0.15, 0.85, 8)
    patterns = [
        (1.0, 0.0, 0.0, 0.0),
        (0.0, 1.0, 0.0, 0.0),
        (1.0, -1.0, 0.0, 0.0),
        (0.0, 1.0, 0.0, 0.5),
        (1.0, 0.0, 0.0, 1.0),
        (0.5, 0.5, 0.2, 0.0),
        (2.0, -1.0, 0.0, 1.0),
        (1.0, 1.0, 0.5, -0.5),
    ]
    out = []
    for th in thresholds:
        for p0, p1, q0, q1 in patterns:
            out.append(_payoff(th, p0, p1, q0, q1))
    rng = np.random.default_rng(seed)
    for _ in range(n_random):
        th = float(rng.uniform(0.1, 0.9))
        out.append(_payoff(th, *map(float, rng.normal(size=4))))
    return out


def _payoff(th, p0, p1, q0, q1):
    def f(y, d):
        return (p0 + p1 * y[1]) if d[1] >= th else (q0 + q1 * y[1])
    f.params = (th, p0, p1, q0, q1)
    return f


def gap_search(rule: UpdateRule, grid: Grid, x_b, x_d, dictionary=None):
    """Largest dynamic-value gap over the payoff dictionary: (gap, index, params)."""
    fs = dictionary if dictionary is not None else payoff_dictionary()
    best = (-np.inf, None, None)
    for k, f in enumerate(fs):
        g = dynamic_value_gap(rule, f, x_b, x_d, grid).gap
        if g > best[0]:
            best = (g, k, getattr(f, "params", None))
    return best
