"""Exact two-phase primal simplex on an integer tableau.

Rows are sparse ``{column: int}`` dicts scaled so their entries share no common
factor.  A row's basic variable keeps whatever positive coefficient the last
pivot left it with, so the value of that variable is ``rhs / coef`` and no
fraction is ever stored in the tableau.  Entering and leaving variables follow
Bland's rule, which makes the pivot sequence deterministic and rules out
cycling.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Iterable, Sequence

RHS = -1

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


def _normalize(row: dict[int, int]) -> dict[int, int]:
    g = 0
    for v in row.values():
        g = gcd(g, v)
        if g == 1:
            return row
    if g > 1:
        return {c: v // g for c, v in row.items()}
    return row


class Tableau:
    """``x >= 0`` subject to integer rows ``sum(a_k x_k) (<=|>=|==) b``."""

    def __init__(self, n: int, rows: Iterable[tuple[Sequence[tuple[int, int]], str, int]]):
        self.n = n
        self.rows: list[dict[int, int]] = []
        self.basis: list[int] = []
        self.artificial: set[int] = set()
        col = n
        pending = []
        for terms, sense, rhs in rows:
            row: dict[int, int] = {}
            for k, c in terms:
                if c:
                    row[k] = row.get(k, 0) + c
            row = {k: c for k, c in row.items() if c}
            if rhs < 0:
                row = {k: -c for k, c in row.items()}
                rhs = -rhs
                sense = {"<=": ">=", ">=": "<="}.get(sense, sense)
            pending.append((row, sense, rhs))
        for row, sense, rhs in pending:
            if sense == "<=":
                row[col] = 1
                self.basis.append(col)
                col += 1
            else:
                if sense == ">=":
                    row[col] = -1
                    col += 1
                row[col] = 1
                self.artificial.add(col)
                self.basis.append(col)
                col += 1
            if rhs:
                row[RHS] = rhs
            self.rows.append(row)
        self.ncols = col
        self.pivots = 0

    # -- core pivot -------------------------------------------------------

    def _pivot(self, p: int, q: int, z: list | None = None) -> None:
        prow = self.rows[p]
        a = prow[q]
        if a < 0:
            prow = {c: -v for c, v in prow.items()}
            a = -a
            self.rows[p] = prow
        for r, row in enumerate(self.rows):
            if r == p:
                continue
            f = row.get(q)
            if not f:
                continue
            new = {c: a * v for c, v in row.items()}
            for c, v in prow.items():
                nv = new.get(c, 0) - f * v
                if nv:
                    new[c] = nv
                else:
                    new.pop(c, None)
            self.rows[r] = _normalize(new)
        if z is not None:
            obj, scale = z
            f = obj.get(q)
            if f:
                new = {c: a * v for c, v in obj.items()}
                for c, v in prow.items():
                    nv = new.get(c, 0) - f * v
                    if nv:
                        new[c] = nv
                    else:
                        new.pop(c, None)
                g = gcd(scale * a, *new.values()) if new else scale * a
                z[0] = {c: v // g for c, v in new.items()}
                z[1] = scale * a // g
        self.basis[p] = q
        self.pivots += 1

    def _run(self, z: list, allowed) -> str:
        while True:
            obj = z[0]
            q = None
            for c, v in obj.items():
                if c != RHS and v < 0 and allowed(c) and (q is None or c < q):
                    q = c
            if q is None:
                return OPTIMAL
            best = None
            for r, row in enumerate(self.rows):
                a = row.get(q, 0)
                if a > 0:
                    b = row.get(RHS, 0)
                    if best is None:
                        best = (r, b, a)
                        continue
                    _, bb, ba = best
                    lhs, rhs = b * ba, bb * a
                    if lhs < rhs or (lhs == rhs and self.basis[r] < self.basis[best[0]]):
                        best = (r, b, a)
            if best is None:
                return UNBOUNDED
            self._pivot(best[0], q, z)

    def _objective_row(self, costs: dict[int, int]) -> list:
        obj = {c: v for c, v in costs.items() if v}
        z = [obj, 1]
        for r, row in enumerate(self.rows):
            b = self.basis[r]
            f = z[0].get(b)
            if not f:
                continue
            a = row[b]
            new = {c: a * v for c, v in z[0].items()}
            for c, v in row.items():
                nv = new.get(c, 0) - f * v
                if nv:
                    new[c] = nv
                else:
                    new.pop(c, None)
            g = gcd(z[1] * a, *new.values()) if new else z[1] * a
            z[0] = {c: v // g for c, v in new.items()}
            z[1] = z[1] * a // g
        return z

    # -- phases ------------------------------------------------------------

    def phase_one(self) -> bool:
        """Find a basic feasible solution; False if the rows are infeasible."""
        if self.artificial:
            z = self._objective_row({c: 1 for c in self.artificial})
            self._run(z, lambda c: c not in self.artificial)
            if z[0].get(RHS, 0) != 0:
                return False
            self._evict_artificials()
        self.artificial_free = True
        return True

    def _evict_artificials(self) -> None:
        keep = []
        for r in range(len(self.rows)):
            if self.basis[r] not in self.artificial:
                keep.append(r)
                continue
            row = self.rows[r]
            q = min((c for c in row if c != RHS and c not in self.artificial and c != self.basis[r]), default=None)
            if q is None:
                continue  # redundant row
            self._pivot(r, q)
            keep.append(r)
        self.rows = [self.rows[r] for r in keep]
        self.basis = [self.basis[r] for r in keep]
        art = self.artificial
        self.rows = [{c: v for c, v in row.items() if c not in art} for row in self.rows]

    def minimize(self, costs: dict[int, int]) -> str:
        """Phase two from the current feasible basis. ``costs`` are integers."""
        z = self._objective_row(costs)
        status = self._run(z, lambda c: c not in self.artificial)
        self._z = z
        return status

    def objective_value(self) -> Fraction:
        obj, scale = self._z
        return Fraction(-obj.get(RHS, 0), scale)

    def solution(self) -> list[Fraction]:
        x = [Fraction(0)] * self.n
        for r, row in enumerate(self.rows):
            b = self.basis[r]
            if b < self.n:
                x[b] = Fraction(row.get(RHS, 0), row[b])
        return x


def feasible_point(n: int, rows) -> list[Fraction] | None:
    t = Tableau(n, rows)
    if not t.phase_one():
        return None
    return t.solution()


def minimize(n: int, rows, costs: dict[int, int]) -> tuple[str, Fraction | None, list[Fraction] | None]:
    t = Tableau(n, rows)
    if not t.phase_one():
        return INFEASIBLE, None, None
    status = t.minimize(costs)
    if status != OPTIMAL:
        return status, None, None
    return OPTIMAL, t.objective_value(), t.solution()
