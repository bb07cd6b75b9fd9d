"""Exact feasibility, witnesses and tie-break optimization for constraint systems.

A system is first presolved: singleton equalities (pins, repurposing rows) fix
variables, variables that can only hurt are removed when only feasibility is
asked for, and the remainder splits into independent blocks.  Small blocks go
straight to the exact integer simplex.  Large blocks are solved in floating
point by HiGHS and the answer is then certified exactly: a feasible answer by
substituting a rounded witness into every row, an infeasible one by checking a
rationalized Farkas combination.  Whatever cannot be certified falls back to
the exact simplex.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import floor
from typing import Callable, Mapping, Sequence

from ..model import EQ, FAMILY_ORDER, GE, LE, ConstraintSystem, Row
from . import simplex

EXACT_MAX_VARS = 300
FALLBACK_MAX_VARS = 4000

Value = "int | Fraction"


class InfeasibleSystemError(ValueError):
    pass


class AuditError(AssertionError):
    """A witness failed re-verification against the rows that produced it."""


class RationalPlanWarning(UserWarning):
    pass


# -- public result types -------------------------------------------------------


@dataclass(frozen=True)
class RedistributionPlan:
    """Sparse ``(donor, campaign) -> amount`` map; zero entries are omitted.

    Amounts are integer cents unless ``rational`` is set, in which case some
    entries are exact fractions that could not be rounded without breaking a row.
    """

    values: Mapping[tuple[str, str], int | Fraction]
    rational: bool = False

    def __getitem__(self, key: tuple[str, str]) -> int | Fraction:
        return self.values.get(key, 0)

    def __iter__(self):
        return iter(sorted(self.values.items()))

    def __len__(self) -> int:
        return len(self.values)

    @cached_property
    def inflow(self) -> Mapping[str, int | Fraction]:
        out: dict[str, int | Fraction] = {}
        for (_, j), v in self.values.items():
            out[j] = out.get(j, 0) + v
        return out

    @cached_property
    def spend(self) -> Mapping[str, int | Fraction]:
        out: dict[str, int | Fraction] = {}
        for (i, _), v in self.values.items():
            out[i] = out.get(i, 0) + v
        return out

    def vector(self, system: ConstraintSystem) -> list:
        return [self.values.get(v, 0) for v in system.variables]

    @classmethod
    def from_vector(cls, system: ConstraintSystem, x: Sequence) -> "RedistributionPlan":
        values = {}
        rational = False
        for key, v in zip(system.variables, x):
            if v:
                if isinstance(v, Fraction):
                    if v.denominator == 1:
                        v = int(v)
                    else:
                        rational = True
                values[key] = v
        return cls(values, rational)


@dataclass
class FeasibilityResult:
    feasible: bool
    system: ConstraintSystem
    plan: RedistributionPlan | None = None
    backend: str = "exact"
    certified: bool = True
    _certificate: tuple[str, ...] | None = field(default=None, repr=False)
    _checker: Callable | None = field(default=None, repr=False)

    @property
    def status(self) -> str:
        return "feasible" if self.feasible else "infeasible"

    def __bool__(self) -> bool:
        return self.feasible

    @property
    def certificate(self) -> tuple[str, ...]:
        """Irreducible set of constraint families that are jointly infeasible.

        Removing any one listed family (all of its rows) makes the rest of the
        listed families feasible.  Empty for feasible systems.
        """
        if self.feasible:
            return ()
        if self._certificate is None:
            self._certificate = _family_filter(self.system, self._checker or _decide)
        return self._certificate


# -- reduced problem -------------------------------------------------------------


@dataclass
class _Problem:
    """Rows over a subset of the original variables after presolve."""

    n: int
    rows: list[tuple[tuple[tuple[int, int], ...], str, int]]
    fixed: dict[int, Fraction]
    free: list[int]
    infeasible: bool = False


def _integer_row(terms, sense, rhs):
    if isinstance(rhs, Fraction) and rhs.denominator != 1:
        d = rhs.denominator
        return tuple((k, c * d) for k, c in terms), sense, int(rhs * d)
    return tuple(terms), sense, int(rhs)


def _row_holds(lhs, sense, rhs) -> bool:
    if sense == LE:
        return lhs <= rhs
    if sense == GE:
        return lhs >= rhs
    return lhs == rhs


def presolve(system: ConstraintSystem, *, feasibility_only: bool = True) -> _Problem:
    n = len(system.variables)
    rows = [(r.terms, r.sense, r.rhs) for r in system.rows]
    fixed: dict[int, Fraction] = {}
    for terms, sense, rhs in rows:
        if sense == EQ and len(terms) == 1:
            (k, c), = terms
            v = Fraction(rhs, c)
            if v < 0 or fixed.get(k, v) != v:
                return _Problem(n, [], fixed, [], infeasible=True)
            fixed[k] = v

    reduced = []
    for terms, sense, rhs in rows:
        rest = []
        for k, c in terms:
            if k in fixed:
                rhs -= c * fixed[k]
            else:
                rest.append((k, c))
        if not rest:
            if not _row_holds(0, sense, rhs):
                return _Problem(n, [], fixed, [], infeasible=True)
            continue
        reduced.append((rest, sense, rhs))

    if feasibility_only:
        helps: set[int] = set()
        for terms, sense, _ in reduced:
            for k, c in terms:
                if sense == EQ or (sense == GE) == (c > 0):
                    helps.add(k)
        pruned = []
        for terms, sense, rhs in reduced:
            rest = [(k, c) for k, c in terms if k in helps]
            if not rest:
                if not _row_holds(0, sense, rhs):
                    return _Problem(n, [], fixed, [], infeasible=True)
                continue
            pruned.append((rest, sense, rhs))
        reduced = pruned

    best: dict[tuple, list] = {}
    order = []
    for terms, sense, rhs in reduced:
        key = (tuple(terms), sense)
        if key not in best:
            best[key] = [rhs]
            order.append(key)
            continue
        cur = best[key][0]
        if sense == LE:
            best[key][0] = min(cur, rhs)
        elif sense == GE:
            best[key][0] = max(cur, rhs)
        elif cur != rhs:
            return _Problem(n, [], fixed, [], infeasible=True)
    final = [_integer_row(key[0], key[1], best[key][0]) for key in order]
    used = sorted({k for terms, _, _ in final for k, _ in terms})
    return _Problem(n, final, fixed, used)


def _blocks(problem: _Problem) -> list[tuple[list[int], list]]:
    parent = {k: k for k in problem.free}

    def find(k):
        while parent[k] != k:
            parent[k] = parent[parent[k]]
            k = parent[k]
        return k

    for terms, _, _ in problem.rows:
        root = find(terms[0][0])
        for k, _ in terms[1:]:
            other = find(k)
            if other != root:
                if other < root:
                    root, other = other, root
                parent[other] = root
    groups: dict[int, list[int]] = {}
    for k in problem.free:
        groups.setdefault(find(k), []).append(k)
    rows_of: dict[int, list] = {}
    for row in problem.rows:
        rows_of.setdefault(find(row[0][0][0]), []).append(row)
    return [(groups[r], rows_of.get(r, [])) for r in sorted(groups)]


def _localize(vars_, rows):
    pos = {k: i for i, k in enumerate(vars_)}
    return [(tuple((pos[k], c) for k, c in terms), s, b) for terms, s, b in rows]


# -- block solvers ----------------------------------------------------------------


def _exact_block(n, rows) -> list[Fraction] | None:
    return simplex.feasible_point(n, rows)


def _solve_block(n, rows, backend: str, stats: dict) -> list | None:
    if backend == "exact" or (backend == "auto" and n <= EXACT_MAX_VARS):
        return _exact_block(n, rows)
    from . import guided

    status, x = guided.feasible_point(n, rows)
    stats["float"] = stats.get("float", 0) + 1
    if status == guided.CERTIFIED:
        return x
    if status == guided.INFEASIBLE_CERTIFIED:
        return None
    if n <= FALLBACK_MAX_VARS:
        stats["fallback"] = stats.get("fallback", 0) + 1
        return _exact_block(n, rows)
    stats["uncertified"] = stats.get("uncertified", 0) + 1
    return x if status == guided.FEASIBLE_UNCERTIFIED else None


def _identity_holds(system: ConstraintSystem) -> bool:
    x = system.original
    return all(r.evaluate(x) for r in system.rows)


def _decide(system: ConstraintSystem, backend: str = "auto", stats: dict | None = None):
    """Return an exact witness vector, or None when the system is infeasible."""
    stats = {} if stats is None else stats
    if _identity_holds(system):
        stats["identity"] = stats.get("identity", 0) + 1
        return list(system.original)
    problem = presolve(system)
    if problem.infeasible:
        return None
    x: list = [Fraction(0)] * problem.n
    for k, v in problem.fixed.items():
        x[k] = v
    for vars_, rows in _blocks(problem):
        sol = _solve_block(len(vars_), _localize(vars_, rows), backend, stats)
        if sol is None:
            return None
        for k, v in zip(vars_, sol):
            x[k] = v
    return x


def _audit(system: ConstraintSystem, x: Sequence) -> None:
    bad = system.violated(x)
    if bad:
        raise AuditError(f"witness violates {len(bad)} row(s), first: {bad[0].family} {bad[0].label}")


def _to_cents(system: ConstraintSystem, x: Sequence) -> tuple[list, bool]:
    """Integer witness if some rounding of ``x`` keeps every row; else ``x`` as is."""
    if all(not isinstance(v, Fraction) or v.denominator == 1 for v in x):
        return [int(v) for v in x], False
    for rounder in (lambda v: floor(v + Fraction(1, 2)), floor):
        y = [rounder(v) if isinstance(v, Fraction) else v for v in x]
        if system.is_satisfied_by(y):
            return y, False
    return list(x), True


def check_feasible(system: ConstraintSystem, *, backend: str = "auto", cache: dict | None = None) -> FeasibilityResult:
    """Decide whether any plan satisfies every row of ``system``.

    ``backend`` is ``"exact"`` (integer simplex only), ``"float"`` (HiGHS with
    exact certification) or ``"auto"`` (chosen per block by size).  ``cache``
    may be any dict; results are memoized on the system's row fingerprint.
    """
    key = system.fingerprint if cache is not None else None
    if key is not None and key in cache:
        hit = cache[key]
        if hit is None:
            return FeasibilityResult(False, system, backend=backend)
        return FeasibilityResult(True, system, RedistributionPlan.from_vector(system, hit[0]), backend, hit[1])
    stats: dict = {}
    x = _decide(system, backend, stats)
    certified = not stats.get("uncertified")
    if x is None:
        if cache is not None:
            cache[key] = None
        checker = lambda cs: _decide(cs, backend)
        return FeasibilityResult(False, system, backend=backend, certified=certified, _checker=checker)
    x, rational = _to_cents(system, x)
    _audit(system, x)
    if rational:
        warnings.warn("witness kept at rational precision: cent rounding breaks a row", RationalPlanWarning, stacklevel=2)
    if cache is not None:
        cache[key] = (tuple(x), certified)
    return FeasibilityResult(True, system, RedistributionPlan.from_vector(system, x), backend, certified)


def _family_filter(system: ConstraintSystem, decide) -> tuple[str, ...]:
    """Deletion filter over constraint families in canonical order."""
    present = [f for f in FAMILY_ORDER if any(r.family == f for r in system.rows)]
    keep = list(present)
    for fam in present:
        trial = [f for f in keep if f != fam]
        sub = _restrict(system, set(trial))
        if decide(sub) is None:
            keep = trial
    return tuple(keep)


def _restrict(system: ConstraintSystem, families: set[str]) -> ConstraintSystem:
    return ConstraintSystem(
        system.variables,
        tuple(r for r in system.rows if r.family in families),
        system.original,
        system.budgets,
        system.success,
        system.spec,
    )


# -- tie-break -----------------------------------------------------------------------


@dataclass(frozen=True)
class TiebreakWeights:
    """Lexicographic secondary objectives; either stage can be switched off."""

    discarded: bool = True
    movement: bool = True


def _optimize_block(n, rows, original, weights: TiebreakWeights, backend: str):
    """Lexicographic optimum over one block; returns exact values or None."""
    if backend == "float" or (backend == "auto" and n > EXACT_MAX_VARS):
        from . import guided

        return guided.tiebreak(n, rows, original, weights)
    cur_rows = list(rows)
    x = None
    if weights.discarded:
        status, value, x = simplex.minimize(n, cur_rows, {k: -1 for k in range(n)})
        if status != simplex.OPTIMAL:
            return None
        total = -value
        terms = tuple((k, total.denominator) for k in range(n))
        cur_rows.append((terms, EQ, total.numerator))
    if weights.movement:
        extra = []
        costs = {}
        m = n
        for k in range(n):
            a = original[k]
            if a:
                # R_k - p_k + q_k == A_k, cost p_k + q_k
                extra.append((((k, 1), (m, -1), (m + 1, 1)), EQ, a))
                costs[m] = costs[m + 1] = 1
                m += 2
            else:
                costs[k] = 1
        status, _, y = simplex.minimize(m, cur_rows + extra, costs)
        if status != simplex.OPTIMAL:
            return None
        x = y[:n]
    if x is None:
        x = simplex.feasible_point(n, cur_rows)
    return x


def optimize_tiebreak(
    system: ConstraintSystem,
    weights: TiebreakWeights | None = None,
    *,
    backend: str = "auto",
) -> RedistributionPlan:
    """Among feasible plans, minimize discarded funds, then total movement |R - A|.

    Raises :class:`InfeasibleSystemError` when no plan exists.
    """
    weights = weights or TiebreakWeights()
    problem = presolve(system, feasibility_only=False)
    if problem.infeasible:
        raise InfeasibleSystemError("system has no feasible plan")
    x: list = [Fraction(0)] * problem.n
    for k, v in problem.fixed.items():
        x[k] = v
    # variables in no row at all are only limited by R >= 0
    loose = set(range(problem.n)) - set(problem.fixed) - set(problem.free)
    if loose and weights.discarded:
        raise InfeasibleSystemError("unbounded variables: discarded funds undefined")
    for k in loose:
        x[k] = Fraction(0)
    for vars_, rows in _blocks(problem):
        original = [system.original[k] for k in vars_]
        sol = _optimize_block(len(vars_), _localize(vars_, rows), original, weights, backend)
        if sol is None:
            raise InfeasibleSystemError("system has no feasible plan")
        for k, v in zip(vars_, sol):
            x[k] = v
    x, rational = _to_cents(system, x)
    _audit(system, x)
    if rational:
        warnings.warn("tie-break plan kept at rational precision", RationalPlanWarning, stacklevel=2)
    return RedistributionPlan.from_vector(system, x)


def movement(plan: RedistributionPlan, system: ConstraintSystem):
    x = plan.vector(system)
    return sum(abs(v - a) for v, a in zip(x, system.original))


def discarded(plan: RedistributionPlan, system: ConstraintSystem):
    return sum(system.budgets.values()) - sum(plan.values.values())
