"""Independent reference computations for the test suite.

Nothing here imports the package's solvers: these are brute-force or
third-party (scipy) routes to the same numbers.
"""

from __future__ import annotations

import itertools

import numpy as np
from scipy.optimize import linprog


def linprog_max(c, A_eq=None, b_eq=None, A_ub=None, b_ub=None, bounds=(0, None)):
    """max c.x with scipy's HiGHS; returns (status, value, x)."""
    res = linprog(-np.asarray(c, dtype=float), A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq,
                  bounds=bounds, method="highs")
    if res.status == 0:
        return "Optimal", -res.fun, res.x
    if res.status == 2:
        return "Infeasible", None, None
    if res.status == 3:
        return "Unbounded", None, None
    return "Other", None, None


def chord_envelope(t, v):
    """Concave envelope on a line by checking every chord through each point: O(n^3)."""
    t, v = np.asarray(t, dtype=float), np.asarray(v, dtype=float)
    out = v.copy()
    for k in range(len(t)):
        for a in range(len(t)):
            for b in range(len(t)):
                if t[a] <= t[k] <= t[b] and t[a] < t[b]:
                    lam = (t[b] - t[k]) / (t[b] - t[a])
                    out[k] = max(out[k], lam * v[a] + (1 - lam) * v[b])
    return out


def simplex_concavification(P, f, x):
    """max sum lam f s.t. lam >= 0, sum lam = 1, sum lam P = x (via scipy)."""
    P = np.asarray(P, dtype=float)
    A = np.vstack([np.ones(len(P)), P.T])
    b = np.concatenate([[1.0], x])
    status, val, _ = linprog_max(f, A_eq=A, b_eq=b)
    assert status == "Optimal"
    return val


def order_max(P, f, below=True):
    """max of f over grid points componentwise below (or above) each point."""
    P = np.asarray(P, dtype=float)
    out = np.empty(len(P))
    for i, p in enumerate(P):
        mask = np.all(P <= p + 1e-12, axis=1) if below else np.all(P >= p - 1e-12, axis=1)
        out[i] = np.max(np.asarray(f)[mask])
    return out


def mps_orbit_value(t, f, mu):
    """max sum f dnu over mean-preserving spreads nu of mu on a line grid (scipy LP on the
    transport plan gamma[x, y] with rows summing to mu(x) and keeping each row's mean)."""
    t, f, mu = (np.asarray(a, dtype=float) for a in (t, f, mu))
    n = len(t)
    A, b = [], []
    for x in range(n):
        r = np.zeros((n, n)); r[x, :] = 1
        A.append(r.ravel()); b.append(mu[x])
        r = np.zeros((n, n)); r[x, :] = t - t[x]
        A.append(r.ravel()); b.append(0.0)
    c = np.tile(f, n)
    status, val, _ = linprog_max(c, A_eq=np.array(A), b_eq=np.array(b))
    assert status == "Optimal"
    return val


def icv_value(t, f, mu):
    """max sum f dnu over nu below mu in the increasing concave order on a line grid:
    rows of the plan may only lower the mean."""
    t, f, mu = (np.asarray(a, dtype=float) for a in (t, f, mu))
    n = len(t)
    A, b, G, h = [], [], [], []
    for x in range(n):
        r = np.zeros((n, n)); r[x, :] = 1
        A.append(r.ravel()); b.append(mu[x])
        r = np.zeros((n, n)); r[x, :] = t - t[x]
        G.append(r.ravel()); h.append(0.0)
    status, val, _ = linprog_max(np.tile(f, n), A_eq=np.array(A), b_eq=np.array(b),
                                 A_ub=np.array(G), b_ub=np.array(h))
    assert status == "Optimal"
    return val


def basis_vertices(A, b, tol=1e-9):
    """Vertices of {x >= 0 : A x <= b} by enumerating bases of [A | I] z = b."""
    A, b = np.asarray(A, dtype=float), np.asarray(b, dtype=float)
    m, n = A.shape
    S = np.hstack([A, np.eye(m)])
    verts = []
    for cols in itertools.combinations(range(n + m), m):
        B = S[:, cols]
        if abs(np.linalg.det(B)) < 1e-12:
            continue
        zb = np.linalg.solve(B, b)
        if np.any(zb < -tol):
            continue
        z = np.zeros(n + m)
        z[list(cols)] = zb
        x = z[:n]
        if not any(np.allclose(x, v, atol=1e-8) for v in verts):
            verts.append(x)
    return verts


def dynkin_value(f, Q):
    """Least excessive majorant of f for the chain Q: min sum g s.t. g >= f, g >= Q g (scipy)."""
    f, Q = np.asarray(f, dtype=float), np.asarray(Q, dtype=float)
    n = len(f)
    G = np.vstack([-np.eye(n), Q - np.eye(n)])
    h = np.concatenate([-f, np.zeros(n)])
    res = linprog(np.ones(n), A_ub=G, b_ub=h, bounds=(None, None), method="highs")
    assert res.status == 0
    return res.x


def option_to_own_brute(prices, f, w):
    """Designer posts one price p; the seller answers with at most two prices whose mean
    is at most p (the increasing concave orbit of a point mass), ties broken for the designer.
    Returns (designer value, p index)."""
    t = np.asarray(prices, dtype=float)
    n = len(t)
    best = (-np.inf, None)
    for p in range(n):
        opts = []
        for a in range(n):
            for b in range(a, n):
                alphas = set()
                if t[a] <= t[p] + 1e-12:
                    alphas.add(1.0)
                if t[b] <= t[p] + 1e-12:
                    alphas.add(0.0)
                if t[a] <= t[p] <= t[b] and t[b] > t[a]:
                    alphas.add((t[b] - t[p]) / (t[b] - t[a]))
                for al in alphas:
                    opts.append((al * f[a] + (1 - al) * f[b], al * w[a] + (1 - al) * w[b]))
        top = max(o[0] for o in opts)
        lead = max(o[1] for o in opts if o[0] >= top - 1e-12)
        if lead > best[0] + 1e-12:
            best = (lead, p)
    return best


def grether_hand(x_b, x_d, y):
    """Grether(2, 1) correction map evaluated with scalar arithmetic (binary state)."""
    r0 = x_d[0] / x_b[0] * y[0]
    r1 = x_d[1] / x_b[1] * y[1]
    s = r0 + r1
    r0, r1 = r0 / s, r1 / s
    # d(x, y) proportional to x^(alpha - beta) * y^beta with alpha = 2, beta = 1
    d0, d1 = x_d[0] * r0, x_d[1] * r1
    return d0 / (d0 + d1), d1 / (d0 + d1)
