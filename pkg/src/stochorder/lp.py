"""Dense revised simplex with a float backend and an exact rational backend.

Problems are stated as

    max (or min)  c.x
    s.t.          A_eq x  = b_eq
                  A_ub x <= b_ub
                  lower <= x <= upper

Lower bounds default to 0 and may be -inf (free variable); upper bounds
default to +inf. Internally every problem is rewritten in standard form
(x >= 0, equality rows, slacks) and solved by a two-phase revised simplex that
keeps an explicit basis inverse. Pricing is Dantzig's rule; after a run of
degenerate pivots the solver switches to Bland's rule until it makes
progress again.

The exact backend runs the same code on numpy object arrays of Fractions with
all tolerances set to zero.
"""

from __future__ import annotations

import contextlib
import contextvars
import itertools
import logging
import os
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

import numpy as np

from .errors import NumericalFailure, PreconditionError, SizeError, ValidationError
from .measure import rational_array, to_rational

TIGHT_TOL = 1e-8
FEAS_TOL = 1e-9
PIVOT_TOL = 1e-9
EXACT_MAX_VARS = 60
DEGENERATE_RUN = 30
REFACTOR_EVERY = 60

log = logging.getLogger("stochorder.lp")
_trace_configured = False


def _trace_enabled() -> bool:
    global _trace_configured
    if os.environ.get("STOCHORDER_LP_TRACE") != "1":
        return False
    if not _trace_configured:
        handler = logging.FileHandler(os.environ.get("STOCHORDER_LP_TRACE_FILE", "stochorder_lp_trace.log"))
        handler.setFormatter(logging.Formatter("%(message)s"))
        log.addHandler(handler)
        log.setLevel(logging.DEBUG)
        _trace_configured = True
    return True


class Status(str, Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"


def _matrix(a, n: int, exact: bool) -> np.ndarray:
    if a is None:
        return np.zeros((0, n), dtype=object if exact else float)
    m = rational_array(a) if exact else np.asarray(a, dtype=float)
    if m.ndim == 1:
        m = m.reshape(1, -1) if m.size else m.reshape(0, n)
    return m


def _vector(v, m: int, exact: bool) -> np.ndarray:
    if v is None:
        return np.zeros(m, dtype=object if exact else float)
    return rational_array(v).reshape(-1) if exact else np.asarray(v, dtype=float).reshape(-1)


def _has_fraction(*arrays) -> bool:
    for a in arrays:
        if a is None:
            continue
        arr = np.asarray(a, dtype=object)
        if any(isinstance(v, Fraction) for v in arr.flat):
            return True
    return False


def _finite(v) -> bool:
    return not (isinstance(v, float) and not np.isfinite(v))


def _bounds(v, n: int, default: float, exact: bool) -> np.ndarray:
    if v is None:
        raw = [default] * n
    else:
        raw = list(np.asarray(v, dtype=object).reshape(-1))
    if len(raw) != n:
        raise ValidationError("bounds must have one entry per variable")
    if not exact:
        return np.asarray(raw, dtype=float)
    out = np.empty(n, dtype=object)
    for i, x in enumerate(raw):
        out[i] = to_rational(x) if _finite(float(x)) else float(x)
    return out


@dataclass(frozen=True)
class LinearProgram:
    objective: np.ndarray
    eq_lhs: np.ndarray | None = None
    eq_rhs: np.ndarray | None = None
    ineq_lhs: np.ndarray | None = None
    ineq_rhs: np.ndarray | None = None
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None
    maximize: bool = True

    def __post_init__(self):
        exact = _has_fraction(self.objective, self.eq_lhs, self.eq_rhs, self.ineq_lhs, self.ineq_rhs)
        c = rational_array(self.objective).reshape(-1) if exact else np.asarray(self.objective, dtype=float).reshape(-1)
        n = c.size
        A = _matrix(self.eq_lhs, n, exact)
        G = _matrix(self.ineq_lhs, n, exact)
        b = _vector(self.eq_rhs, A.shape[0], exact)
        h = _vector(self.ineq_rhs, G.shape[0], exact)
        if A.shape[1] != n or G.shape[1] != n:
            raise ValidationError("constraint matrices must have one column per variable")
        if b.size != A.shape[0] or h.size != G.shape[0]:
            raise ValidationError("right-hand sides must match constraint rows")
        if not exact and (not np.all(np.isfinite(b)) or not np.all(np.isfinite(h))):
            raise ValidationError("right-hand sides must be finite")
        lo = _bounds(self.lower, n, 0.0, exact)
        up = _bounds(self.upper, n, np.inf, exact)
        for name, val in (("objective", c), ("eq_lhs", A), ("eq_rhs", b), ("ineq_lhs", G), ("ineq_rhs", h), ("lower", lo), ("upper", up)):
            object.__setattr__(self, name, val)
        object.__setattr__(self, "_exact_input", exact)

    @property
    def n(self) -> int:
        return self.objective.size

    def is_exact(self) -> bool:
        return self._exact_input

    def to_exact(self) -> "LinearProgram":
        if self._exact_input:
            return self
        opt = lambda a: rational_array(a) if a.size else None
        return LinearProgram(rational_array(self.objective), opt(self.eq_lhs), opt(self.eq_rhs),
                             opt(self.ineq_lhs), opt(self.ineq_rhs), list(self.lower), list(self.upper),
                             self.maximize)

    def to_float(self) -> "LinearProgram":
        if not self._exact_input:
            return self
        f = lambda a: None if a.size == 0 else np.asarray(a, dtype=float)
        return LinearProgram(f(self.objective), f(self.eq_lhs), f(self.eq_rhs), f(self.ineq_lhs),
                             f(self.ineq_rhs), np.asarray(self.lower, dtype=float),
                             np.asarray(self.upper, dtype=float), self.maximize)


@dataclass
class LpSolution:
    """Result of a solve.

    ``dual`` lists one multiplier per constraint row in the order
    (equality rows, inequality rows, finite upper-bound rows). At an optimum
    it certifies optimality; for a maximization the inequality and upper
    multipliers are >= 0. When infeasible, ``dual`` is a Farkas vector y with
    y^T A >= 0 on every variable column and y^T (b - A lower) < 0 (inequality
    entries >= 0). When unbounded, ``primal`` holds a recession ray along
    which the objective improves without bound.
    """

    status: Status
    value: object
    primal: np.ndarray | None
    dual: np.ndarray | None
    active_set: list = field(default_factory=list)
    dual_value: object = None
    iterations: int = 0
    exact: bool = False

    @property
    def optimal(self) -> bool:
        return self.status == Status.OPTIMAL

    def duality_residual(self) -> float:
        if not self.optimal:
            return float("nan")
        return abs(float(self.value) - float(self.dual_value))


_audit: contextvars.ContextVar = contextvars.ContextVar("stochorder_lp_audit", default=None)


@contextlib.contextmanager
def duality_audit():
    """Collect the strong-duality residual of every optimal solve in the block."""
    record = {"count": 0, "max_residual": 0.0}
    token = _audit.set(record)
    try:
        yield record
    finally:
        _audit.reset(token)


# ---------------------------------------------------------------- arithmetic


class _Arith:
    def __init__(self, exact: bool):
        self.exact = exact
        if exact:
            self.zero, self.one = Fraction(0), Fraction(1)
            self.piv_tol = self.opt_tol = self.feas_tol = 0
        else:
            self.zero, self.one = 0.0, 1.0
            self.piv_tol, self.opt_tol, self.feas_tol = PIVOT_TOL, FEAS_TOL, FEAS_TOL

    def zeros(self, *shape):
        if self.exact:
            return np.full(shape, Fraction(0), dtype=object)
        return np.zeros(shape)

    def eye(self, m):
        out = self.zeros(m, m)
        for i in range(m):
            out[i, i] = self.one
        return out

    def inv(self, B):
        if not self.exact:
            return np.linalg.inv(B)
        return _exact_inverse(B)


# Rational tableaux are mostly zeros and Fraction arithmetic is slow, so exact
# mode multiplies nonzero entries only; float mode keeps numpy's dense kernels.


def _nz(v):
    return np.nonzero(v != 0)[0]


def _vecmat(v, M, ar: _Arith, nzrows=None):
    if not ar.exact:
        return v @ M
    out = ar.zeros(M.shape[1])
    for i in _nz(v):
        cols = nzrows[i] if nzrows is not None else _nz(M[i])
        if cols.size:
            out[cols] = out[cols] + v[i] * M[i, cols]
    return out


def _matvec(M, v, ar: _Arith):
    if not ar.exact:
        return M @ v
    out = ar.zeros(M.shape[0])
    for j in _nz(v):
        rows = _nz(M[:, j])
        if rows.size:
            out[rows] = out[rows] + M[rows, j] * v[j]
    return out


def _rank_one_update(Binv, u, row, r, ar: _Arith):
    """Binv - outer(u, row), with row r replaced by ``row``."""
    if not ar.exact:
        Binv = Binv - np.outer(u, row)
    else:
        Binv = Binv.copy()
        rows, cols = _nz(u), _nz(row)
        if rows.size and cols.size:
            block = np.ix_(rows, cols)
            Binv[block] = Binv[block] - np.outer(u[rows], row[cols])
    Binv[r] = row
    return Binv


def _exact_inverse(B):
    m = B.shape[0]
    M = np.concatenate([B.copy(), _Arith(True).eye(m)], axis=1)
    for col in range(m):
        piv = next((r for r in range(col, m) if M[r, col] != 0), None)
        if piv is None:
            raise NumericalFailure("singular basis in exact refactorization")
        if piv != col:
            M[[col, piv]] = M[[piv, col]]
        M[col] = M[col] / M[col, col]
        for r in range(m):
            if r != col and M[r, col] != 0:
                M[r] = M[r] - M[r, col] * M[col]
    return M[:, m:]


# ---------------------------------------------------------------- standard form


@dataclass
class _StdForm:
    A: np.ndarray
    b: np.ndarray
    c: np.ndarray          # minimization costs over standard columns
    col_map: np.ndarray    # n_orig x n_struct transform T, x = offset + T x'
    offset: np.ndarray
    row_sign: np.ndarray   # +1/-1 applied to each row to make b >= 0
    n_struct: int
    slack_cols: list
    art_cols: list
    basis: list
    A_full: np.ndarray     # original rows (eq, ineq, upper) over original variables
    b_full: np.ndarray
    n_eq: int
    upper_vars: list


def _standardize(lp: LinearProgram, ar: _Arith) -> _StdForm:
    n = lp.n
    exact = ar.exact
    conv = (lambda a: rational_array(a)) if exact else (lambda a: np.asarray(a, dtype=float))
    lower = lp.lower
    upper = lp.upper

    upper_vars = [j for j in range(n) if _finite(upper[j])]
    rows_eq = conv(lp.eq_lhs) if lp.eq_lhs.size else ar.zeros(0, n)
    rhs_eq = conv(lp.eq_rhs) if lp.eq_rhs.size else ar.zeros(0)
    rows_ub = conv(lp.ineq_lhs) if lp.ineq_lhs.size else ar.zeros(0, n)
    rhs_ub = conv(lp.ineq_rhs) if lp.ineq_rhs.size else ar.zeros(0)
    up_rows = ar.zeros(len(upper_vars), n)
    up_rhs = ar.zeros(len(upper_vars))
    for k, j in enumerate(upper_vars):
        up_rows[k, j] = ar.one
        up_rhs[k] = to_rational(upper[j]) if exact else float(upper[j])
    G = np.concatenate([rows_ub, up_rows], axis=0)
    h = np.concatenate([rhs_ub, up_rhs])

    # variable transform
    cols = []
    offset = ar.zeros(n)
    for j in range(n):
        if _finite(lower[j]):
            offset[j] = to_rational(lower[j]) if exact else float(lower[j])
            cols.append((j, 1))
        else:
            cols.append((j, 1))
            cols.append((j, -1))
    T = ar.zeros(n, len(cols))
    for k, (j, s) in enumerate(cols):
        T[j, k] = ar.one if s > 0 else -ar.one
    n_struct = len(cols)
    src = [j for j, _ in cols]
    flip = [k for k, (_, s) in enumerate(cols) if s < 0]

    def through_t(M):
        # M @ T without the dense product
        out = M[..., src].copy()
        if flip:
            out[..., flip] = -out[..., flip]
        return out

    A_eq = through_t(rows_eq) if rows_eq.shape[0] else ar.zeros(0, n_struct)
    b_eq = rhs_eq - _matvec(rows_eq, offset, ar) if rows_eq.shape[0] else ar.zeros(0)
    A_ub = through_t(G) if G.shape[0] else ar.zeros(0, n_struct)
    b_ub = h - _matvec(G, offset, ar) if G.shape[0] else ar.zeros(0)
    m_eq, m_ub = A_eq.shape[0], A_ub.shape[0]
    m = m_eq + m_ub

    # columns: structural | slacks | artificials
    A = ar.zeros(m, n_struct + m_ub)
    A[:m_eq, :n_struct] = A_eq
    A[m_eq:, :n_struct] = A_ub
    for i in range(m_ub):
        A[m_eq + i, n_struct + i] = ar.one
    b = np.concatenate([b_eq, b_ub]) if m else ar.zeros(0)
    sign = np.ones(m, dtype=int)
    for i in range(m):
        if b[i] < 0:
            sign[i] = -1
            A[i] = -A[i]
            b[i] = -b[i]
    slack_cols = list(range(n_struct, n_struct + m_ub))
    basis = [None] * m
    for i in range(m_ub):
        if sign[m_eq + i] > 0:
            basis[m_eq + i] = n_struct + i
    need_art = [i for i in range(m) if basis[i] is None]
    art_cols = []
    if need_art:
        extra = ar.zeros(m, len(need_art))
        for k, i in enumerate(need_art):
            extra[i, k] = ar.one
            basis[i] = A.shape[1] + k
            art_cols.append(A.shape[1] + k)
        A = np.concatenate([A, extra], axis=1)

    c_orig = conv(lp.objective)
    c_struct = through_t(c_orig)
    if lp.maximize:
        c_struct = -c_struct
    c = ar.zeros(A.shape[1])
    c[:n_struct] = c_struct

    A_full = np.concatenate([rows_eq, G], axis=0)
    b_full = np.concatenate([rhs_eq, h])
    return _StdForm(A, b, c, T, offset, sign, n_struct, slack_cols, art_cols, basis, A_full, b_full,
                    m_eq, upper_vars)


# ---------------------------------------------------------------- simplex core


class _Outcome:
    def __init__(self, kind, basis, Binv, xB, entering=None, direction=None, iterations=0):
        self.kind = kind
        self.basis = basis
        self.Binv = Binv
        self.xB = xB
        self.entering = entering
        self.direction = direction
        self.iterations = iterations


def _simplex(A, b, c, basis, Binv, xB, eligible, ar: _Arith, cap: int, trace: bool, phase: int, nzrows=None):
    m, N = A.shape
    run = 0
    it = 0
    while True:
        if it >= cap:
            raise NumericalFailure(f"iteration cap {cap} reached in phase {phase}")
        y = _vecmat(c[basis], Binv, ar) if m else ar.zeros(0)
        d = c - _vecmat(y, A, ar, nzrows) if m else c.copy()
        d[basis] = ar.zero
        d[~eligible] = ar.zero
        cand = np.nonzero(d < -ar.opt_tol)[0]
        if trace:
            log.debug("phase %d it %d basis %s obj %s", phase, it, basis, c[basis] @ xB if m else 0)
        if cand.size == 0:
            return _Outcome("optimal", basis, Binv, xB, iterations=it)
        bland = run >= DEGENERATE_RUN
        if bland:
            q = int(cand[0])
        else:
            q = int(cand[np.argmin(np.asarray(d[cand], dtype=float))])
        u = _matvec(Binv, A[:, q], ar)
        pos = np.nonzero(u > ar.piv_tol)[0]
        if pos.size == 0:
            return _Outcome("unbounded", basis, Binv, xB, entering=q, direction=u, iterations=it)
        ratios = xB[pos] / u[pos]
        if ar.exact:
            theta = min(ratios)
            ties = pos[ratios == theta]
        else:
            theta = ratios.min()
            ties = pos[ratios <= theta + 1e-12]
        if bland:
            r = int(min(ties, key=lambda i: basis[i]))
        else:
            r = int(ties[np.argmax(np.asarray(u[ties], dtype=float))])
        piv = u[r]
        row = Binv[r] / piv
        Binv = _rank_one_update(Binv, u, row, r, ar)
        xB = xB - theta * u
        xB[r] = theta
        basis = list(basis)
        basis[r] = q
        if not ar.exact:
            xB[np.abs(xB) < 1e-13] = 0.0
        it += 1
        run = run + 1 if theta <= ar.feas_tol else 0
        if not ar.exact and it % REFACTOR_EVERY == 0:
            try:
                Binv = np.linalg.inv(A[:, basis])
            except np.linalg.LinAlgError as exc:
                raise NumericalFailure(f"singular basis at iteration {it}: {exc}") from exc
            xB = Binv @ b
            xB[np.abs(xB) < 1e-13] = 0.0
            if np.any(xB < -1e-7):
                cond = np.linalg.cond(A[:, basis])
                raise NumericalFailure(f"basis lost feasibility after refactorization (cond={cond:.3g})")
            xB = np.clip(xB, 0.0, None)


def _pivot_out(A, basis, Binv, xB, r, q, ar: _Arith):
    u = _matvec(Binv, A[:, q], ar)
    piv = u[r]
    row = Binv[r] / piv
    Binv = _rank_one_update(Binv, u, row, r, ar)
    theta = xB[r] / piv
    xB = xB - theta * u
    xB[r] = theta
    basis = list(basis)
    basis[r] = q
    return basis, Binv, xB


def _solve(lp: LinearProgram, exact: bool) -> LpSolution:
    ar = _Arith(exact)
    if exact:
        lp = lp.to_exact()
    else:
        lp = lp.to_float()
    sf = _standardize(lp, ar)
    A, b = sf.A, sf.b
    m, N = A.shape
    trace = _trace_enabled()
    cap = 50 * (m + N) + 50
    basis = list(sf.basis)
    Binv = ar.eye(m)
    xB = b.copy()
    art = np.zeros(N, dtype=bool)
    art[sf.art_cols] = True
    iterations = 0
    nzrows = [_nz(A[i]) for i in range(m)] if exact else None

    if sf.art_cols:
        c1 = ar.zeros(N)
        c1[sf.art_cols] = ar.one
        out = _simplex(A, b, c1, basis, Binv, xB, np.ones(N, dtype=bool), ar, cap, trace, 1, nzrows)
        iterations += out.iterations
        basis, Binv, xB = out.basis, out.Binv, out.xB
        infeas = c1[basis] @ xB
        scale = 1.0 if exact else max(1.0, float(np.max(np.abs(b))) if b.size else 1.0)
        if (exact and infeas > 0) or (not exact and infeas > FEAS_TOL * scale):
            w = _vecmat(c1[basis], Binv, ar)
            y = -(w * sf.row_sign)
            return LpSolution(Status.INFEASIBLE, float("nan") if not exact else None, None, y,
                              iterations=iterations, exact=exact)
        # drive remaining artificials out of the basis
        for r in range(m):
            if not art[basis[r]]:
                continue
            row = _vecmat(Binv[r], A, ar, nzrows)
            best, best_val = None, ar.piv_tol
            for j in range(N):
                if art[j] or j in basis:
                    continue
                v = abs(row[j])
                if v > best_val:
                    best, best_val = j, v
            if best is not None:
                basis, Binv, xB = _pivot_out(A, basis, Binv, xB, r, best, ar)
        if not exact:
            xB = np.clip(xB, 0.0, None)

    eligible = ~art
    out = _simplex(A, b, sf.c, basis, Binv, xB, eligible, ar, cap, trace, 2, nzrows)
    iterations += out.iterations
    basis, Binv, xB = out.basis, out.Binv, out.xB

    if out.kind == "unbounded":
        dstd = ar.zeros(N)
        dstd[out.entering] = ar.one
        for i, col in enumerate(basis):
            dstd[col] = dstd[col] - out.direction[i]
        ray = sf.col_map @ dstd[: sf.n_struct]
        value = float("inf") if lp.maximize else float("-inf")
        return LpSolution(Status.UNBOUNDED, value, ray, None, iterations=iterations, exact=exact)

    xstd = ar.zeros(N)
    for i, col in enumerate(basis):
        xstd[col] = xB[i]
    x = sf.offset + sf.col_map @ xstd[: sf.n_struct]
    y = _vecmat(sf.c[basis], Binv, ar) if m else ar.zeros(0)
    pi = y * sf.row_sign
    if lp.maximize:
        pi = -pi
    c_orig = lp.objective
    value = c_orig @ x
    reduced = c_orig - (_matvec(sf.A_full.T, pi, ar) if sf.A_full.shape[0] else ar.zeros(lp.n))
    dual_value = (sf.b_full @ pi if sf.b_full.size else ar.zero)
    for j in range(lp.n):
        lo = lp.lower[j]
        if _finite(lo) and lo != 0:
            dual_value = dual_value + lo * reduced[j]
    sol = LpSolution(Status.OPTIMAL, value, x, pi, _active_set(lp, x, exact), dual_value,
                     iterations=iterations, exact=exact)
    rec = _audit.get()
    if rec is not None:
        rec["count"] += 1
        rec["max_residual"] = max(rec["max_residual"], sol.duality_residual())
    return sol


def _active_set(lp: LinearProgram, x, exact: bool, tol: float = TIGHT_TOL) -> list:
    tol = 0 if exact else tol
    act = [("eq", i) for i in range(lp.eq_lhs.shape[0])]
    if lp.ineq_lhs.shape[0]:
        slack = lp.ineq_rhs - lp.ineq_lhs @ x
        act += [("ineq", i) for i in range(len(slack)) if abs(slack[i]) <= tol]
    for j in range(lp.n):
        lo, up = lp.lower[j], lp.upper[j]
        if _finite(lo) and abs(x[j] - lo) <= tol:
            act.append(("lower", j))
        if _finite(up) and abs(up - x[j]) <= tol:
            act.append(("upper", j))
    return act


def solve_lp(lp: LinearProgram, exact: bool = False) -> LpSolution:
    """Solve in floating point unless ``exact`` is set (or the data is rational)."""
    if exact or lp.is_exact():
        return exact_mode_solve(lp)
    return _solve(lp, exact=False)


def exact_mode_solve(lp: LinearProgram, max_vars: int = EXACT_MAX_VARS) -> LpSolution:
    if lp.n > max_vars:
        raise SizeError(f"exact mode is capped at {max_vars} variables, problem has {lp.n}")
    return _solve(lp, exact=True)


def lexicographic_solve(lp: LinearProgram, secondary, exact: bool = False) -> tuple[LpSolution, LpSolution]:
    """Optimize ``lp``, then optimize ``secondary`` over its optimal face.

    The optimal face is pinned by complementary slackness against the first
    solve's dual: variables with nonzero reduced cost are fixed at their lower
    bound and inequality rows with a nonzero multiplier become equalities.
    """
    first = solve_lp(lp, exact=exact)
    if not first.optimal:
        return first, first
    if first.exact:
        lp = lp.to_exact()
    tol = 0 if first.exact else 1e-9
    pi = first.dual
    n_eq, n_ub = lp.eq_lhs.shape[0], lp.ineq_lhs.shape[0]
    A_full = np.concatenate([lp.eq_lhs, lp.ineq_lhs], axis=0)
    reduced = lp.objective - (A_full.T @ pi[: n_eq + n_ub] if A_full.shape[0] else 0)
    upper_vars = [j for j in range(lp.n) if _finite(lp.upper[j])]
    for k, j in enumerate(upper_vars):
        reduced[j] = reduced[j] - pi[n_eq + n_ub + k]
    lower, upper = lp.lower.copy(), lp.upper.copy()
    for j in range(lp.n):
        if abs(reduced[j]) > tol and _finite(lower[j]):
            upper[j] = lower[j]
    for k, j in enumerate(upper_vars):
        if abs(pi[n_eq + n_ub + k]) > tol:
            lower[j] = lp.upper[j]
    eq_rows = [lp.eq_lhs] if n_eq else []
    eq_rhs = [lp.eq_rhs] if n_eq else []
    keep = []
    for i in range(n_ub):
        if abs(pi[n_eq + i]) > tol:
            eq_rows.append(lp.ineq_lhs[i : i + 1])
            eq_rhs.append(lp.ineq_rhs[i : i + 1])
        else:
            keep.append(i)
    sec = rational_array(secondary) if first.exact else np.asarray(secondary, dtype=float)
    face = LinearProgram(
        sec,
        np.concatenate(eq_rows, axis=0) if eq_rows else None,
        np.concatenate(eq_rhs) if eq_rhs else None,
        lp.ineq_lhs[keep] if keep else None,
        lp.ineq_rhs[keep] if keep else None,
        lower, upper, lp.maximize,
    )
    second = solve_lp(face, exact=first.exact)
    if not second.optimal and not first.exact:
        # float drift can make the pinned face look empty; use a value row instead
        sign = -1.0 if lp.maximize else 1.0
        G = np.vstack([lp.ineq_lhs.reshape(-1, lp.n), sign * lp.objective])
        h = np.concatenate([lp.ineq_rhs, [sign * float(first.value) + 1e-9]])
        relaxed = LinearProgram(sec, lp.eq_lhs if n_eq else None, lp.eq_rhs if n_eq else None, G, h,
                                lp.lower, lp.upper, lp.maximize)
        second = solve_lp(relaxed)
    return first, second


# ---------------------------------------------------------------- rank / vertices


def exact_rank(M) -> int:
    M = rational_array(M).copy()
    if M.size == 0:
        return 0
    rows, cols = M.shape
    rank = 0
    for col in range(cols):
        piv = next((r for r in range(rank, rows) if M[r, col] != 0), None)
        if piv is None:
            continue
        M[[rank, piv]] = M[[piv, rank]]
        for r in range(rows):
            if r != rank and M[r, col] != 0:
                M[r] = M[r] - (M[r, col] / M[rank, col]) * M[rank]
        rank += 1
        if rank == rows:
            break
    return rank


def matrix_rank(M, exact: bool = False) -> int:
    if exact:
        return exact_rank(M)
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        return 0
    return int(np.linalg.matrix_rank(M, tol=1e-9 * max(1.0, np.abs(M).max())))


@dataclass
class VertexReport:
    is_vertex: bool
    rank: int
    dim: int
    active_set: list


def _constraint_rows(lp: LinearProgram):
    """All constraints as (label, row, rhs, kind) with kind in {'eq','le','ge'}."""
    rows = []
    for i in range(lp.eq_lhs.shape[0]):
        rows.append((("eq", i), lp.eq_lhs[i], lp.eq_rhs[i], "eq"))
    for i in range(lp.ineq_lhs.shape[0]):
        rows.append((("ineq", i), lp.ineq_lhs[i], lp.ineq_rhs[i], "le"))
    n = lp.n
    exact = lp.objective.dtype == object
    for j in range(n):
        e = np.full(n, Fraction(0), dtype=object) if exact else np.zeros(n)
        e[j] = Fraction(1) if exact else 1.0
        lo, up = lp.lower[j], lp.upper[j]
        if _finite(lo):
            rows.append((("lower", j), e, lo, "ge"))
        if _finite(up):
            rows.append((("upper", j), e, up, "le"))
    return rows


def vertex_test(point, lp: LinearProgram, exact: bool = False, tol: float = TIGHT_TOL) -> VertexReport:
    """Is ``point`` a vertex of the feasible region of ``lp``?"""
    if exact:
        lp = lp.to_exact()
        x = rational_array(point).reshape(-1)
        tol = 0
    else:
        lp = lp.to_float()
        x = np.asarray(point, dtype=float).reshape(-1)
    if x.size != lp.n:
        raise PreconditionError("point dimension does not match the program")
    feas_tol = 0 if exact else 1e-8
    active_rows, labels = [], []
    for label, row, rhs, kind in _constraint_rows(lp):
        lhs = row @ x
        if kind == "eq":
            if abs(lhs - rhs) > feas_tol:
                raise PreconditionError(f"point violates {label} by {float(abs(lhs - rhs)):.3g}")
            active_rows.append(row)
            labels.append(label)
            continue
        viol = lhs - rhs if kind == "le" else rhs - lhs
        if viol > feas_tol:
            raise PreconditionError(f"point violates {label} by {float(viol):.3g}")
        if abs(lhs - rhs) <= tol:
            active_rows.append(row)
            labels.append(label)
    rank = matrix_rank(np.array(active_rows), exact=exact) if active_rows else 0
    return VertexReport(rank == lp.n, rank, lp.n, labels)


def _solve_square_exact(M, rhs):
    m = M.shape[0]
    aug = np.concatenate([rational_array(M), rational_array(rhs).reshape(-1, 1)], axis=1)
    for col in range(m):
        piv = next((r for r in range(col, m) if aug[r, col] != 0), None)
        if piv is None:
            return None
        aug[[col, piv]] = aug[[piv, col]]
        aug[col] = aug[col] / aug[col, col]
        for r in range(m):
            if r != col and aug[r, col] != 0:
                aug[r] = aug[r] - aug[r, col] * aug[col]
    return aug[:, m]


def enumerate_vertices(lp: LinearProgram, exact: bool = False, max_subsets: int = 3_000_000) -> list[np.ndarray]:
    """All vertices of the feasible region by active-set enumeration.

    Candidate points come from batched floating-point solves of every square
    active system; with ``exact`` each candidate is re-solved and re-checked in
    rational arithmetic.
    """
    lpf = lp.to_float()
    rows = _constraint_rows(lpf)
    n = lpf.n
    eq = [(r, b) for (lab, r, b, k) in rows if k == "eq"]
    other = [(r, b, k) for (lab, r, b, k) in rows if k != "eq"]
    if eq:
        E = np.array([r for r, _ in eq], dtype=float)
        e = np.array([b for _, b in eq], dtype=float)
        # keep a maximal independent subset of equality rows
        keep = []
        for i in range(len(eq)):
            if matrix_rank(E[keep + [i]]) == len(keep) + 1:
                keep.append(i)
        E, e = E[keep], e[keep]
        eq_idx = [i for i, (lab, r, b, k) in enumerate(rows) if k == "eq"]
        eq_idx = [eq_idx[i] for i in keep]
    else:
        E, e, eq_idx = np.zeros((0, n)), np.zeros(0), []
    need = n - E.shape[0]
    other_idx = [i for i, (lab, r, b, k) in enumerate(rows) if k != "eq"]
    if need < 0 or need > len(other_idx):
        return []
    from math import comb

    total = comb(len(other_idx), need)
    if total > max_subsets:
        raise SizeError(f"vertex enumeration needs {total} active sets (cap {max_subsets})")
    R = np.array([np.asarray(r, dtype=float) for (_, r, _, _) in rows]).reshape(len(rows), n)
    rhs = np.array([float(b) for (_, _, b, _) in rows])
    kinds = [k for (_, _, _, k) in rows]
    found: dict = {}
    subsets = list(itertools.combinations(other_idx, need))
    batch = 20000
    for start in range(0, len(subsets), batch):
        chunk = subsets[start : start + batch]
        idx = np.array([list(eq_idx) + list(s) for s in chunk], dtype=int).reshape(len(chunk), n)
        if n == 0:
            continue
        Ms = R[idx]
        bs = rhs[idx]
        dets = np.linalg.det(Ms)
        ok = np.abs(dets) > 1e-12
        if not np.any(ok):
            continue
        sols = np.linalg.solve(Ms[ok], bs[ok][..., None])[..., 0]
        for s_i, x in zip(np.nonzero(ok)[0], sols):
            lhs = R @ x
            feas = True
            for val, b, k in zip(lhs, rhs, kinds):
                if (k == "eq" and abs(val - b) > 1e-8) or (k == "le" and val > b + 1e-8) or (k == "ge" and val < b - 1e-8):
                    feas = False
                    break
            if not feas:
                continue
            key = tuple(np.round(x, 9))
            if key not in found:
                found[key] = (x, idx[s_i])
    if not exact:
        return [v[0] for v in found.values()]
    lpe = lp.to_exact()
    rows_e = _constraint_rows(lpe)
    out = {}
    for x, act in found.values():
        M = np.array([rows_e[i][1] for i in act], dtype=object)
        b = np.array([rows_e[i][2] for i in act], dtype=object)
        xe = _solve_square_exact(M, b)
        if xe is None:
            continue
        good = True
        for (lab, r, bb, k) in rows_e:
            val = r @ xe
            if (k == "eq" and val != bb) or (k == "le" and val > bb) or (k == "ge" and val < bb):
                good = False
                break
        if good:
            out[tuple(xe)] = xe
    return list(out.values())
