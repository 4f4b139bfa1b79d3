"""Least majorants of a function inside a min-closed cone.

The envelope at x is the best value of sum f deta over measures eta in the
Dirac orbit of x. The generic route solves one LP per grid point; hull and
order-based shortcuts cover the common one-dimensional and monotone cases.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .cones import (
    CONCAVE,
    NONDECREASING,
    ConeKind,
    ConeSpec,
    _line_param,
    dirac_orbit,
    generator_matrix,
    is_min_closed,
    orbit_shape,
)
from .errors import DimensionError, UnsupportedError
from .lp import LinearProgram, solve_lp
from .measure import Grid, Measure, as_float, rational_array

CONTACT_TOL = 1e-8


@dataclass
class EnvelopeResult:
    fbar: np.ndarray
    contact_set: list
    per_point_optimizers: list
    method: str


def _prepare(f, grid: Grid, exact: bool):
    if len(f) != len(grid):
        raise DimensionError(f"function has {len(f)} entries, grid has {len(grid)} points")
    return rational_array(f) if exact else np.asarray(f, dtype=float)


def _zero_weights(n, exact):
    return np.full(n, Fraction(0), dtype=object) if exact else np.zeros(n)


def upper_hull(t, v) -> list[int]:
    """Indices (into t) of the strict vertices of the upper concave hull of (t, v)."""
    order = sorted(range(len(t)), key=lambda i: t[i])
    hull: list[int] = []
    for i in order:
        while len(hull) >= 2:
            a, b = hull[-2], hull[-1]
            # drop b unless it lies strictly above the chord a -> i
            cross = (t[b] - t[a]) * (v[i] - v[a]) - (v[b] - v[a]) * (t[i] - t[a])
            if cross >= 0:
                hull.pop()
            else:
                break
        hull.append(i)
    return hull


def _hull_envelope(t, f, idx, exact):
    """Concave hull of f on the points idx with parameter t (both lists over idx)."""
    tv = [t[k] for k in range(len(idx))]
    fv = [f[k] for k in range(len(idx))]
    hull = upper_hull(tv, fv)
    vals, splits = [], []
    for k in range(len(idx)):
        if len(hull) == 1:
            vals.append(fv[hull[0]])
            splits.append({hull[0]: 1})
            continue
        for a, b in zip(hull[:-1], hull[1:]):
            if tv[a] <= tv[k] <= tv[b]:
                break
        lam = (tv[b] - tv[k]) / (tv[b] - tv[a])
        vals.append(lam * fv[a] + (1 - lam) * fv[b])
        splits.append({a: lam, b: 1 - lam})
    return vals, splits


def _fast_path(f, grid: Grid, cone: ConeSpec, exact: bool):
    """(fbar, optimizer weights per point, method) or None when no shortcut applies."""
    n = len(grid)
    shape = orbit_shape(cone)
    P = grid.coords(exact)
    if shape == "mean":
        # collinear grids (d = 1, binary simplex) reduce to a one-parameter hull
        blocks = [tuple(range(n))]
    elif shape == "slice_mean":
        blocks = cone.partition
    elif shape in ("below", "above"):
        fbar = f.copy()
        opts = []
        for x in range(n):
            mask = grid.partial_order[:, x] if shape == "below" else grid.partial_order[x, :]
            cand = np.nonzero(mask)[0]
            best = max(cand, key=lambda y: (f[y], y == x))
            fbar[x] = f[best]
            w = _zero_weights(n, exact)
            w[x if f[x] == f[best] else best] = 1
            opts.append(w)
        return fbar, opts, "order"
    elif shape == "mean_at_most":
        t = list(P[:, 0])
        vals, splits = _hull_envelope(t, list(f), range(n), exact)
        top = max(range(n), key=lambda k: (vals[k], -float(t[k])))
        fbar = f.copy()
        opts = []
        for x in range(n):
            src = x if t[x] <= t[top] else top
            fbar[x] = vals[src]
            w = _zero_weights(n, exact)
            if vals[src] == f[x] and src == x:
                w[x] = 1
            else:
                for k, lam in splits[src].items():
                    w[k] += lam
            opts.append(w)
        return fbar, opts, "hull"
    else:
        return None
    fbar = f.copy()
    opts = [None] * n
    for block in blocks:
        block = list(block)
        t = _line_param(grid, block, exact)
        if t is None:
            return None
        vals, splits = _hull_envelope(list(t), [f[i] for i in block], block, exact)
        for k, x in enumerate(block):
            fbar[x] = vals[k]
            w = _zero_weights(n, exact)
            if vals[k] == f[x] or (not exact and abs(vals[k] - f[x]) <= CONTACT_TOL):
                w[x] = 1
            else:
                for j, lam in splits[k].items():
                    w[block[j]] += lam
            opts[x] = w
    return fbar, opts, "hull"


def orbit_value(f, grid: Grid, cone: ConeSpec, x: int, exact: bool = False):
    """max sum f deta over the Dirac orbit of x, with an optimal eta."""
    f = _prepare(f, grid, exact)
    value, eta, _ = dirac_orbit(cone, grid, x, exact).maximize(f, exact=exact)
    return value, eta


def c_envelope(f, grid: Grid, cone: ConeSpec, fast: bool = True, exact: bool = False) -> EnvelopeResult:
    cone.check_grid(grid)
    if not is_min_closed(cone, grid):
        raise UnsupportedError(
            f"cone {cone} is not min-closed; its pointwise value is not the optimum, use solve_primal")
    f = _prepare(f, grid, exact)
    n = len(grid)
    res = _fast_path(f, grid, cone, exact) if fast else None
    if res is None:
        fbar = f.copy()
        opts = []
        for x in range(n):
            val, eta, _ = dirac_orbit(cone, grid, x, exact).maximize(f, exact=exact)
            fbar[x] = val
            opts.append(eta)
        method = "lp"
    else:
        fbar, opts, method = res
    if exact:
        contact = [x for x in range(n) if fbar[x] == f[x]]
    else:
        fbar = np.maximum(fbar, f)
        contact = [x for x in range(n) if abs(fbar[x] - f[x]) <= CONTACT_TOL]
    return EnvelopeResult(fbar, contact, [Measure(grid, w) for w in opts], method)


def concavification(f, grid: Grid, exact: bool = False) -> np.ndarray:
    return c_envelope(f, grid, CONCAVE, exact=exact).fbar


def monotone_envelope(f, grid: Grid, exact: bool = False) -> np.ndarray:
    return c_envelope(f, grid, NONDECREASING, exact=exact).fbar


def lower_convex_envelope(f, grid: Grid, exact: bool = False) -> np.ndarray:
    f = _prepare(f, grid, exact)
    return -concavification(-f, grid, exact)


@dataclass
class DualReport:
    dual_value: object
    primal_value: object
    gap: float
    g: np.ndarray
    attained_at_fbar: bool


def dual_envelope_check(f, grid: Grid, cone: ConeSpec, mu: Measure, exact: bool = False) -> DualReport:
    """Minimize sum g dmu over cone members g >= f and compare with sum fbar dmu."""
    cone.check_grid(grid)
    if mu.grid != grid:
        raise DimensionError("measure lives on a different grid")
    if not is_min_closed(cone, grid):
        raise UnsupportedError("dual check compares against the envelope, which needs a min-closed cone")
    f = _prepare(f, grid, exact)
    n = len(grid)
    dt = object if exact else float
    w = mu.to_exact().weights if exact else as_float(mu.weights)
    zero = Fraction(0) if exact else 0.0
    one = Fraction(1) if exact else 1.0
    shape = orbit_shape(cone)
    if cone.kind in (ConeKind.NONDECREASING, ConeKind.NONINCREASING):
        # variables g (free); rows g_i - g_j <= 0 along the order (flipped for -C)
        up = shape == "below"   # orbit below x  <=> members nondecreasing
        rows = []
        for i in range(n):
            for j in range(n):
                if i != j and grid.partial_order[i, j]:
                    r = np.full(n, zero, dtype=dt)
                    r[i], r[j] = (one, -one) if up else (-one, one)
                    rows.append(r)
        G = np.vstack(rows + [-np.eye(n, dtype=int).astype(dt)]) if rows else -np.eye(n).astype(dt)
        h = np.concatenate([np.full(len(rows), zero, dtype=dt), -f])
        lp = LinearProgram(w, None, None, G, h, lower=[-np.inf] * n, maximize=False)
        nvar = n
    else:
        try:
            gens = generator_matrix(cone, grid, exact)
        except UnsupportedError as exc:
            raise UnsupportedError(f"no finite dual rows for cone {cone} on this grid") from exc
        K = gens.shape[0]
        # variables: g (n, free), lam (K, >= 0), c (free)
        nvar = n + K + 1
        eye = np.eye(n, dtype=int).astype(dt)
        A = np.hstack([eye, -gens.T.astype(dt), -np.ones((n, 1), dtype=int).astype(dt)])
        G = np.hstack([-eye, np.zeros((n, K + 1), dtype=int).astype(dt)])
        obj = np.concatenate([w, np.full(K + 1, zero, dtype=dt)])
        lower = [-np.inf] * n + [0] * K + [-np.inf]
        lp = LinearProgram(obj, A, np.full(n, zero, dtype=dt), G, -f, lower=lower, maximize=False)
    sol = solve_lp(lp, exact=exact)
    if not sol.optimal:
        raise AssertionError(f"dual envelope program ended {sol.status}")
    g = sol.primal[:n]
    env = c_envelope(f, grid, cone, exact=exact).fbar
    primal = env @ w
    gap = abs(float(sol.value) - float(primal))
    tol = 0 if exact else 1e-8
    attained = gap <= tol and abs(float(env @ w - sol.value)) <= tol and all(
        float(env[i] - f[i]) >= -1e-9 for i in range(n))
    return DualReport(sol.value, primal, gap, g, attained)
