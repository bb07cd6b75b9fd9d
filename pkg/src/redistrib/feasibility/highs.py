"""A persistent HiGHS model whose answers are certified in integer arithmetic.

Rows are stored as ``lo <= a.x <= hi`` so a search can switch constraints on
and off by changing bounds, letting dual simplex restart from the previous
basis.  Every answer returned as certain has been checked exactly:

* feasible: the LP point is snapped to whole cents and every row and bound is
  re-evaluated with integer arithmetic;
* infeasible: HiGHS's dual ray is scaled to integers and checked as a Farkas
  combination against the row bounds and the column box.
"""

from __future__ import annotations

from math import floor, inf, isinf

import highspy
import numpy as np
import scipy.sparse as sp

FEASIBLE = "feasible"
INFEASIBLE = "infeasible"
UNKNOWN = "unknown"

_SNAP = 1e-6
_RAY_SCALE = 1 << 30


def _quiet(h: highspy.Highs) -> None:
    h.setOptionValue("output_flag", False)
    h.setOptionValue("threads", 1)
    h.setOptionValue("random_seed", 0)
    h.setOptionValue("presolve", "off")


class HighsSystem:
    """``row_lo <= A x <= row_hi``, ``col_lo <= x <= col_hi``, zero objective.

    ``box_hi`` are upper bounds on ``x`` implied by the rows themselves (used
    only to certify infeasibility); they must be valid for every feasible point.
    """

    def __init__(self, A: sp.csr_matrix, row_lo, row_hi, col_lo, col_hi, box_hi, cost=None):
        self.A = sp.csr_matrix(A, dtype=np.int64)
        self.At = self.A.T.tocsr()
        self.m, self.n = self.A.shape
        self.row_lo = list(row_lo)
        self.row_hi = list(row_hi)
        self.col_lo = list(col_lo)
        self.col_hi = list(col_hi)
        self.box_hi = list(box_hi)
        self.h = highspy.Highs()
        _quiet(self.h)
        lp = highspy.HighsLp()
        lp.num_col_ = self.n
        lp.num_row_ = self.m
        lp.col_cost_ = np.zeros(self.n) if cost is None else np.asarray(cost, float)
        lp.col_lower_ = np.array(self.col_lo, float)
        lp.col_upper_ = np.array([highspy.kHighsInf if isinf(v) else v for v in self.col_hi], float)
        lp.row_lower_ = np.array([-highspy.kHighsInf if isinf(v) else v for v in self.row_lo], float)
        lp.row_upper_ = np.array([highspy.kHighsInf if isinf(v) else v for v in self.row_hi], float)
        lp.a_matrix_.format_ = highspy.MatrixFormat.kRowwise
        lp.a_matrix_.start_ = self.A.indptr.astype(np.int32)
        lp.a_matrix_.index_ = self.A.indices.astype(np.int32)
        lp.a_matrix_.value_ = self.A.data.astype(float)
        self.h.passModel(lp)
        self.solves = 0

    # -- bound edits ---------------------------------------------------------

    def set_rows(self, idx, lo, hi) -> None:
        if not len(idx):
            return
        for r, a, b in zip(idx, lo, hi):
            self.row_lo[r] = a
            self.row_hi[r] = b
        self.h.changeRowsBounds(
            len(idx),
            np.asarray(idx, np.int32),
            np.array([-highspy.kHighsInf if isinf(v) else v for v in lo], float),
            np.array([highspy.kHighsInf if isinf(v) else v for v in hi], float),
        )

    def set_cols(self, idx, lo, hi) -> None:
        if not len(idx):
            return
        for k, a, b in zip(idx, lo, hi):
            self.col_lo[k] = a
            self.col_hi[k] = b
        self.h.changeColsBounds(
            len(idx),
            np.asarray(idx, np.int32),
            np.asarray(lo, float),
            np.array([highspy.kHighsInf if isinf(v) else v for v in hi], float),
        )

    # -- exact checks -----------------------------------------------------------

    def holds(self, x: np.ndarray) -> bool:
        # integer vectors below 2**53 compare exactly against float bounds
        if np.any(x < np.array(self.col_lo, float)) or np.any(x > np.array(self.col_hi, float)):
            return False
        ax = self.A @ x
        return bool(np.all(ax >= np.array(self.row_lo, float)) and np.all(ax <= np.array(self.row_hi, float)))

    def _farkas(self, ray) -> bool:
        top = float(np.max(np.abs(ray))) if len(ray) else 0.0
        if top == 0.0:
            return False
        y = np.rint(np.asarray(ray) / top * _RAY_SCALE).astype(np.int64)
        for sign in (1, -1):
            w = sign * y
            g = self.At @ w
            # y.Ax <= sum of row bound contributions
            upper = 0
            ok = True
            for r in np.flatnonzero(w):
                wr = int(w[r])
                bound = self.row_hi[r] if wr > 0 else self.row_lo[r]
                if isinf(bound):
                    ok = False
                    break
                upper += wr * int(bound)
            if not ok:
                continue
            # g.x >= sum over the box
            lower = 0
            for k in np.flatnonzero(g):
                gk = int(g[k])
                bound = self.col_lo[k] if gk > 0 else min(self.col_hi[k], self.box_hi[k])
                if isinf(bound):
                    ok = False
                    break
                lower += gk * int(bound)
            if ok and lower > upper:
                return True
        return False

    # -- solving -----------------------------------------------------------------

    def _snap(self, values) -> np.ndarray:
        out = np.empty(self.n, dtype=np.int64)
        for k, v in enumerate(values):
            r = round(v)
            out[k] = r if abs(v - r) <= _SNAP else floor(v)
        return np.maximum(out, 0)

    def _repair(self, x: np.ndarray) -> np.ndarray:
        """Raise variables of rows left short by flooring, where every other
        row touching the variable still has room."""
        A, At = self.A, self.At
        ax = [int(v) for v in A @ x]
        x = x.copy()
        for r in range(self.m):
            need = self.row_lo[r] - ax[r]
            if need <= 0:
                continue
            for p in range(A.indptr[r], A.indptr[r + 1]):
                k, c = int(A.indices[p]), int(A.data[p])
                if c <= 0:
                    continue
                room = self.col_hi[k] - int(x[k])
                for q in range(At.indptr[k], At.indptr[k + 1]):
                    rr, a = int(At.indices[q]), int(At.data[q])
                    if a > 0 and not isinf(self.row_hi[rr]):
                        room = min(room, (self.row_hi[rr] - ax[rr]) // a)
                    elif a < 0 and not isinf(self.row_lo[rr]):
                        room = min(room, (ax[rr] - self.row_lo[rr]) // -a)
                step = min(-(-need // c), room)
                if step <= 0:
                    continue
                x[k] += step
                for q in range(At.indptr[k], At.indptr[k + 1]):
                    ax[int(At.indices[q])] += int(At.data[q]) * step
                need -= step * c
                if need <= 0:
                    break
        return x

    def _witness(self) -> np.ndarray | None:
        x = self._snap(self.h.getSolution().col_value)
        if self.holds(x):
            return x
        x = self._repair(x)
        return x if self.holds(x) else None

    def solve(self) -> tuple[str, np.ndarray | None]:
        """Run HiGHS and certify; ``UNKNOWN`` means certification failed."""
        self.solves += 1
        self.h.run()
        status = self.h.getModelStatus()
        if status == highspy.HighsModelStatus.kOptimal:
            x = self._witness()
            return (FEASIBLE, x) if x is not None else (UNKNOWN, None)
        if status == highspy.HighsModelStatus.kInfeasible:
            _, has, ray = self.h.getDualRay()
            if has and self._farkas(ray):
                return INFEASIBLE, None
            return UNKNOWN, None
        return UNKNOWN, None

    def solve_with_margin(self, rows, margins) -> tuple[str, np.ndarray | None]:
        """Tighten the lower bounds of ``rows`` by ``margins`` for one solve,
        so flooring the LP point keeps them, then restore the bounds."""
        lo = [self.row_lo[r] for r in rows]
        hi = [self.row_hi[r] for r in rows]
        self.h.changeRowsBounds(
            len(rows),
            np.asarray(rows, np.int32),
            np.array([a + d if not isinf(a) else -highspy.kHighsInf for a, d in zip(lo, margins)], float),
            np.array([highspy.kHighsInf if isinf(v) else v for v in hi], float),
        )
        self.h.run()
        self.solves += 1
        result = (UNKNOWN, None)
        if self.h.getModelStatus() == highspy.HighsModelStatus.kOptimal:
            self.set_rows(rows, lo, hi)
            x = self._witness()
            if x is not None:
                result = (FEASIBLE, x)
            return result
        self.set_rows(rows, lo, hi)
        return result


def from_rows(n, rows):
    """Build a :class:`HighsSystem` from ``(terms, sense, rhs)`` rows."""
    from ..model import EQ, GE, LE

    r_idx, c_idx, vals, lo, hi = [], [], [], [], []
    box = [inf] * n
    for r, (terms, sense, rhs) in enumerate(rows):
        for k, c in terms:
            r_idx.append(r)
            c_idx.append(k)
            vals.append(c)
        lo.append(rhs if sense in (GE, EQ) else -inf)
        hi.append(rhs if sense in (LE, EQ) else inf)
        if sense in (LE, EQ) and all(c > 0 for _, c in terms):
            for k, c in terms:
                box[k] = min(box[k], -(-rhs // c))
    A = sp.csr_matrix((vals, (r_idx, c_idx)), shape=(len(rows), n), dtype=np.int64)
    return HighsSystem(A, lo, hi, [0] * n, [inf] * n, box)
