"""One persistent LP per instance and scheme, reused across success sets.

Goal, Nice2 and relaxed Order rows depend on the success set; Nice rows depend
on the ladder level.  All of them live in a single HiGHS model and are switched
on or off through their bounds, so consecutive checks during a search restart
from the previous basis instead of from scratch.
"""

from __future__ import annotations

from math import inf

import numpy as np
import scipy.sparse as sp

from ..model import EQ, ModelBuilder, NiceLevel, Ordering
from .highs import FEASIBLE, INFEASIBLE, UNKNOWN, HighsSystem


class SuccessSetModel:
    def __init__(self, builder: ModelBuilder):
        self.builder = builder
        inst = builder.instance
        n = len(builder.variables)
        rows: list[tuple[list[int], list[int]]] = []
        lo: list[float] = []
        hi: list[float] = []
        col_hi = [inf] * n
        col_lo = [0] * n
        box = [inf] * n

        def add(terms, a, b):
            rows.append(([k for k, _ in terms], [c for _, c in terms]))
            lo.append(a)
            hi.append(b)
            return len(rows) - 1

        for row in builder.fixed_rows:
            if row.family == "All2":
                for k, _ in row.terms:
                    box[k] = min(box[k], row.rhs)
            if len(row.terms) == 1:
                (k, c), = row.terms
                if row.sense == EQ:
                    col_lo[k] = max(col_lo[k], row.rhs)
                col_hi[k] = min(col_hi[k], row.rhs)
                continue
            add(row.terms, -inf, row.rhs)
        for row in builder.pins:
            (k, _), = row.terms
            col_lo[k] = max(col_lo[k], row.rhs)
            col_hi[k] = min(col_hi[k], row.rhs)

        base = builder.base
        into = builder.into
        self.goal_row = {}
        self.nice2_row = {}
        self.nice3_row = {}
        self.nice1_row = {}
        for j in inst.campaign_ids:
            terms = [(k, 1) for k in into[j]]
            if j in base.funded:
                add(terms, builder.goals[j], inf)
                self.nice1_row[j] = add(terms, -inf, inf)
            else:
                self.goal_row[j] = add(terms, -inf, inf)
                self.nice2_row[j] = add(terms, -inf, inf)
                self.nice3_row[j] = add(terms, -inf, inf)
        self.order_row = []
        for i, x, y in builder.order_pairs:
            kx, ky = builder.index[(i, x)], builder.index[(i, y)]
            self.order_row.append((x, y, add([(kx, 1), (ky, -1)], -inf, inf)))

        r_idx = [r for r, (ks, _) in enumerate(rows) for _ in ks]
        c_idx = [k for ks, _ in rows for k in ks]
        vals = [c for _, cs in rows for c in cs]
        A = sp.csr_matrix((vals, (r_idx, c_idx)), shape=(len(rows), n), dtype=np.int64)
        self.system = HighsSystem(A, lo, hi, col_lo, col_hi, box)
        self.state: dict[int, tuple[float, float]] = {}

    def _target(self, success: frozenset[str], level: NiceLevel) -> dict[int, tuple[float, float]]:
        b = self.builder
        fams = level.families
        inflow = b.base.inflow
        want: dict[int, tuple[float, float]] = {}
        for j, r in self.goal_row.items():
            want[r] = (b.goals[j], inf) if j in success else (-inf, inf)
        for j, r in self.nice1_row.items():
            want[r] = (-inf, inflow[j]) if "Nice1" in fams else (-inf, inf)
        for j, r in self.nice2_row.items():
            want[r] = (-inf, inflow[j]) if "Nice2" in fams and j not in success else (-inf, inf)
        for j, r in self.nice3_row.items():
            want[r] = (-inf, b.goals[j]) if "Nice3" in fams else (-inf, inf)
        strict = b.spec.ordering is Ordering.STRICT
        for x, y, r in self.order_row:
            want[r] = (0, inf) if strict or (x in success and y in success) else (-inf, inf)
        return want

    def check(self, success, level: NiceLevel) -> tuple[str, np.ndarray | None]:
        """Certified status of ``success`` at ``level`` plus a witness when feasible."""
        want = self._target(frozenset(success), NiceLevel(level))
        sysm = self.system
        changed = [r for r, bounds in want.items() if (sysm.row_lo[r], sysm.row_hi[r]) != bounds]
        sysm.set_rows(changed, [want[r][0] for r in changed], [want[r][1] for r in changed])
        status, x = sysm.solve()
        if status == UNKNOWN and x is None:
            goals = [r for r in self.goal_row.values() if sysm.row_lo[r] > -inf]
            margins = [sysm.A.indptr[r + 1] - sysm.A.indptr[r] + 1 for r in goals]
            status, x = sysm.solve_with_margin(goals, margins)
        return status, x
