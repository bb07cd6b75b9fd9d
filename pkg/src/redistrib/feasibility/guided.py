"""Floating-point LP guidance with exact certification.

HiGHS (through :func:`scipy.optimize.linprog`) proposes an answer; nothing is
trusted until it is checked in integer arithmetic.  A proposed witness is
snapped to whole cents and substituted into every row.  A proposed
infeasibility is turned into a nonnegative integer combination of the rows
whose left side cannot reach its right side anywhere in the variable box.
"""

from __future__ import annotations

from fractions import Fraction
from math import floor, inf

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

from ..model import EQ, GE, LE

CERTIFIED = "certified"
INFEASIBLE_CERTIFIED = "infeasible-certified"
FEASIBLE_UNCERTIFIED = "feasible-uncertified"
UNKNOWN = "unknown"

_SNAP = 1e-6
_LAMBDA_SCALE = 1 << 30


def _matrices(n, rows, margins=None):
    ub_r, ub_c, ub_v, ub_b = [], [], [], []
    eq_r, eq_c, eq_v, eq_b = [], [], [], []
    nu = ne = 0
    for idx, (terms, sense, rhs) in enumerate(rows):
        if sense == EQ:
            for k, c in terms:
                eq_r.append(ne)
                eq_c.append(k)
                eq_v.append(c)
            eq_b.append(rhs)
            ne += 1
            continue
        sign = -1 if sense == GE else 1
        extra = margins[idx] if margins is not None else 0
        for k, c in terms:
            ub_r.append(nu)
            ub_c.append(k)
            ub_v.append(sign * c)
        ub_b.append(sign * (rhs + extra))
        nu += 1
    A_ub = sp.csr_matrix((ub_v, (ub_r, ub_c)), shape=(nu, n)) if nu else None
    A_eq = sp.csr_matrix((eq_v, (eq_r, eq_c)), shape=(ne, n)) if ne else None
    return A_ub, np.array(ub_b, float), A_eq, np.array(eq_b, float)


def _lp(c, A_ub, b_ub, A_eq, b_eq, n):
    return linprog(
        c,
        A_ub=A_ub,
        b_ub=b_ub if A_ub is not None else None,
        A_eq=A_eq,
        b_eq=b_eq if A_eq is not None else None,
        bounds=(0, None),
        method="highs",
    )


def _snap(values) -> list[int]:
    out = []
    for v in values:
        r = round(v)
        out.append(max(0, int(r) if abs(v - r) <= _SNAP else floor(v)))
    return out


def _holds(rows, x) -> bool:
    for terms, sense, rhs in rows:
        lhs = sum(c * x[k] for k, c in terms)
        if sense == LE and lhs > rhs or sense == GE and lhs < rhs or sense == EQ and lhs != rhs:
            return False
    return True


def _margins(rows):
    # Goal-style rows (>= with positive coefficients) get room for flooring.
    return [
        len(terms) + 1 if sense == GE and all(c > 0 for _, c in terms) else 0
        for terms, sense, _ in rows
    ]


def _upper_bounds(n, rows) -> list:
    u: list = [inf] * n
    for terms, sense, rhs in rows:
        if sense == LE and all(c > 0 for _, c in terms):
            for k, c in terms:
                b = Fraction(rhs, c)
                if b < u[k]:
                    u[k] = b
    return u


def farkas_certify(n, rows) -> bool:
    """True when a rationalized elastic-LP dual proves ``rows`` infeasible."""
    le_rows = []
    for terms, sense, rhs in rows:
        if sense in (LE, EQ):
            le_rows.append((terms, rhs))
        if sense in (GE, EQ):
            le_rows.append((tuple((k, -c) for k, c in terms), -rhs))
    m = len(le_rows)
    if not m:
        return False
    r_idx, c_idx, vals = [], [], []
    for r, (terms, _) in enumerate(le_rows):
        for k, c in terms:
            r_idx.append(r)
            c_idx.append(k)
            vals.append(c)
        r_idx.append(r)
        c_idx.append(n + r)
        vals.append(-1)
    A = sp.csr_matrix((vals, (r_idx, c_idx)), shape=(m, n + m))
    b = np.array([h for _, h in le_rows], float)
    cost = np.concatenate([np.zeros(n), np.ones(m)])
    res = linprog(cost, A_ub=A, b_ub=b, bounds=(0, None), method="highs")
    if res.status != 0 or res.fun <= 1e-9:
        return False
    lam = -np.asarray(res.ineqlin.marginals)
    top = lam.max()
    if top <= 0:
        return False
    lam_int = [int(round(v / top * _LAMBDA_SCALE)) if v > 0 else 0 for v in lam]
    g = [0] * n
    rhs = 0
    for (terms, h), w in zip(le_rows, lam_int):
        if w:
            rhs += w * h
            for k, c in terms:
                g[k] += w * c
    u = _upper_bounds(n, rows)
    low = Fraction(0)
    for k, gk in enumerate(g):
        if gk < 0:
            if u[k] == inf:
                return False
            low += gk * u[k]
    return low > rhs


def feasible_point(n, rows):
    """Return ``(status, x)``; ``x`` is an exact integer witness when certified."""
    margins = _margins(rows)
    A_ub, b_ub, A_eq, b_eq = _matrices(n, rows, margins)
    res = _lp(np.zeros(n), A_ub, b_ub, A_eq, b_eq, n)
    if res.status == 0:
        x = _snap(res.x)
        if _holds(rows, x):
            return CERTIFIED, x
    if any(margins):
        A_ub, b_ub, A_eq, b_eq = _matrices(n, rows)
        res = _lp(np.zeros(n), A_ub, b_ub, A_eq, b_eq, n)
        if res.status == 0:
            x = _snap(res.x)
            if _holds(rows, x):
                return CERTIFIED, x
            return UNKNOWN, None
    if res.status == 2 and farkas_certify(n, rows):
        return INFEASIBLE_CERTIFIED, None
    return UNKNOWN, None


def tiebreak(n, rows, original, weights):
    """Float lexicographic optimum, snapped to an exactly verified plan.

    The snapped plan always satisfies ``rows`` exactly; its objective values
    are optimal up to the LP tolerance and the cent floor.
    """
    margins = _margins(rows)
    for use in ([margins, None] if any(margins) else [None]):
        x = _tiebreak_once(n, rows, original, weights, use)
        if x is not None and _holds(rows, x):
            return [Fraction(v) for v in x]
    status, y = feasible_point(n, rows)
    return [Fraction(v) for v in y] if status == CERTIFIED else None


def _tiebreak_once(n, rows, original, weights, margins):
    A_ub, b_ub, A_eq, b_eq = _matrices(n, rows, margins)
    ones = np.ones(n)
    res = None
    if weights.discarded:
        res = _lp(-ones, A_ub, b_ub, A_eq, b_eq, n)
        if res.status != 0:
            return None
        total = -res.fun
        # keep the stage-one spend up to solver tolerance
        cut = sp.csr_matrix(-ones.reshape(1, -1))
        A_ub = cut if A_ub is None else sp.vstack([A_ub, cut]).tocsr()
        b_ub = np.append(b_ub, -(total - 1e-7 * max(1.0, total)))
    if not weights.movement:
        return _snap(res.x) if res is not None else None
    a = np.asarray(original, float)
    has = a > 0
    m = int(has.sum())
    # variables: R (n), p (m), q (m); R_k - p + q == A_k where A_k > 0
    link = sp.hstack(
        [
            sp.csr_matrix((np.ones(m), (np.arange(m), np.flatnonzero(has))), shape=(m, n)),
            -sp.identity(m, format="csr"),
            sp.identity(m, format="csr"),
        ]
    ).tocsr()
    pad = lambda M: None if M is None else sp.hstack([M, sp.csr_matrix((M.shape[0], 2 * m))]).tocsr()
    A_eq2 = link if A_eq is None else sp.vstack([pad(A_eq), link]).tocsr()
    b_eq2 = a[has] if A_eq is None else np.concatenate([b_eq, a[has]])
    cost = np.concatenate([np.where(has, 0.0, 1.0), np.ones(2 * m)])
    res = _lp(cost, pad(A_ub), b_ub, A_eq2, b_eq2, n + 2 * m)
    return _snap(res.x[:n]) if res.status == 0 else None
