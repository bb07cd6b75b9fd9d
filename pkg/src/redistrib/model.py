"""Linear constraint systems over the redistribution variables R[i, j].

A system is built for one instance, one scheme and one candidate success set
``S`` (the campaigns forced to meet their goal).  Every row carries the name of
the constraint family it belongs to so infeasibility can be reported in terms
of the model rather than matrix indices.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Iterable, Mapping, Sequence

from .domain import Instance, baseline
from .overlap import OverlapIndex, preserving_overlap


class ModelError(ValueError):
    pass


class Scheme(str, enum.Enum):
    NAIVE = "naive"
    REPURPOSING = "repurposing"
    UNORDERED_CP = "unordered"
    ORDERED_CP = "ordered"

    @property
    def choice_preserving(self) -> bool:
        return self in (Scheme.UNORDERED_CP, Scheme.ORDERED_CP)


class NiceLevel(str, enum.Enum):
    """Which optional constraints are active, most protective first."""

    ALL = "all3nice"
    NICE12 = "nice12"
    NICE1 = "nice1only"
    NONE = "nonenice"

    @property
    def families(self) -> frozenset[str]:
        return _NICE_FAMILIES[self]

    def ladder(self) -> list["NiceLevel"]:
        """This level and every weaker one, in the order they are tried."""
        order = list(NiceLevel)
        return order[order.index(self):]


_NICE_FAMILIES = {
    NiceLevel.ALL: frozenset({"Nice1", "Nice2", "Nice3"}),
    NiceLevel.NICE12: frozenset({"Nice1", "Nice2"}),
    NiceLevel.NICE1: frozenset({"Nice1"}),
    NiceLevel.NONE: frozenset(),
}


class Ordering(str, enum.Enum):
    RELAXED = "relaxed"
    STRICT = "strict"


@dataclass(frozen=True)
class SchemeSpec:
    """Scheme choice plus every knob that changes the constraint rows.

    ``frozen_donors`` / ``frozen_campaigns`` pin R = A for everything the
    donor gives (or the campaign receives); they are how acceptance scenarios
    reach the model.  ``cp_all3`` keeps the overlap rows for choice-preserving
    schemes (on by default).
    """

    scheme: Scheme = Scheme.NAIVE
    nice_level: NiceLevel = NiceLevel.ALL
    ordering: Ordering = Ordering.RELAXED
    cp_all3: bool = True
    ladder: bool = True
    tiebreak: bool = True
    frozen_donors: frozenset = frozenset()
    frozen_campaigns: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        object.__setattr__(self, "nice_level", NiceLevel(self.nice_level))
        object.__setattr__(self, "ordering", Ordering(self.ordering))
        object.__setattr__(self, "frozen_donors", frozenset(self.frozen_donors))
        object.__setattr__(self, "frozen_campaigns", frozenset(self.frozen_campaigns))

    def at_level(self, level: NiceLevel) -> "SchemeSpec":
        return replace(self, nice_level=NiceLevel(level))

    @property
    def label(self) -> str:
        if self.scheme is Scheme.ORDERED_CP:
            return f"{self.scheme.value}-{self.ordering.value}"
        return self.scheme.value


LE, GE, EQ = "<=", ">=", "=="

FAMILY_ORDER = ("Goal", "All2", "All3", "CP2", "Rep", "Nice1", "Nice2", "Nice3", "Order", "Pin")


@dataclass(frozen=True)
class Row:
    family: str
    label: str
    terms: tuple[tuple[int, int], ...]
    sense: str
    rhs: int

    def evaluate(self, values: Sequence) -> bool:
        lhs = sum(c * values[k] for k, c in self.terms)
        if self.sense == LE:
            return lhs <= self.rhs
        if self.sense == GE:
            return lhs >= self.rhs
        return lhs == self.rhs


@dataclass(frozen=True)
class ConstraintSystem:
    variables: tuple[tuple[str, str], ...]
    rows: tuple[Row, ...]
    original: tuple[int, ...]
    budgets: Mapping[str, int]
    success: frozenset[str]
    spec: SchemeSpec = field(default_factory=SchemeSpec)

    @cached_property
    def index(self) -> Mapping[tuple[str, str], int]:
        return {v: k for k, v in enumerate(self.variables)}

    @cached_property
    def fingerprint(self) -> tuple:
        return tuple((r.terms, r.sense, r.rhs) for r in self.rows), len(self.variables)

    @property
    def families(self) -> set[str]:
        return {r.family for r in self.rows}

    def rows_of(self, family: str) -> list[Row]:
        return [r for r in self.rows if r.family == family]

    def violated(self, values: Sequence) -> list[Row]:
        bad = [r for r in self.rows if not r.evaluate(values)]
        if any(v < 0 for v in values):
            bad.append(Row("Bounds", "R >= 0", (), GE, 0))
        return bad

    def is_satisfied_by(self, values: Sequence) -> bool:
        return not self.violated(values)


def _term_str(system: ConstraintSystem, k: int, c: int) -> str:
    donor, camp = system.variables[k]
    name = f"R[{donor},{camp}]"
    if c == 1:
        return f"+ {name}"
    if c == -1:
        return f"- {name}"
    return f"{'+' if c > 0 else '-'} {abs(c)} {name}"


def describe_system(system: ConstraintSystem) -> str:
    lines = []
    for row in system.rows:
        lhs = " ".join(_term_str(system, k, c) for k, c in row.terms) or "0"
        lhs = lhs[2:] if lhs.startswith("+ ") else lhs
        lines.append(f"{row.family:<6} {row.label}: {lhs} {row.sense} {row.rhs}")
    return "\n".join(lines)


def to_lp_format(system: ConstraintSystem) -> str:
    """CPLEX-LP text of the system (integer coefficients, cents)."""
    out = ["\\ redistribution feasibility system"]
    for k, (donor, camp) in enumerate(system.variables):
        out.append(f"\\ r{k} = R[{donor},{camp}]")
    out += ["Minimize", " obj: 0 r0" if system.variables else " obj: 0", "Subject To"]
    counts: dict[str, int] = {}
    for row in system.rows:
        n = counts[row.family] = counts.get(row.family, 0) + 1
        terms = " ".join(
            f"{'+' if c > 0 else '-'} {abs(c) if abs(c) != 1 else ''}r{k}".replace("  ", " ")
            for k, c in row.terms
        ) or "0 r0"
        sense = {LE: "<=", GE: ">=", EQ: "="}[row.sense]
        out.append(f" {row.family}_{n}: {terms} {sense} {row.rhs}")
    out.append("Bounds")
    out += [f" r{k} >= 0" for k in range(len(system.variables))]
    out.append("End")
    return "\n".join(out) + "\n"


def order_triggered(ax: int, gx: int, ay: int, gy: int) -> bool:
    """Strictly more money, both absolutely and relative to goal (exact)."""
    return ax > ay and ax * gy > ay * gx


class ModelBuilder:
    """Precomputes the rows of a scheme that do not depend on the success set.

    ``build(S)`` then only has to add goal rows, Nice2 rows and (relaxed)
    order rows.
    """

    def __init__(self, instance: Instance, spec: SchemeSpec):
        self.instance = instance
        self.spec = spec
        self.base = baseline(instance)
        unknown_d = spec.frozen_donors - set(instance.donors)
        unknown_c = spec.frozen_campaigns - set(instance.campaign_by_id)
        if unknown_d or unknown_c:
            raise ModelError(f"pins reference unknown ids: {sorted(unknown_d | unknown_c)}")
        self._prepare()

    def _prepare(self) -> None:
        inst, spec = self.instance, self.spec
        A = inst.amounts
        cp = spec.scheme.choice_preserving
        overlaps: dict[tuple[str, str], frozenset[str]] = {}
        if cp:
            for (i, j) in A:
                overlaps[(i, j)] = preserving_overlap(inst, i, j).members
            support = sorted(A)
        else:
            index = OverlapIndex(inst)
            pairs = set()
            for (i, j) in A:
                members = index.agnostic(i, j)
                overlaps[(i, j)] = members
                pairs.update((i, y) for y in members)
            support = sorted(pairs)
        self.overlaps = overlaps
        self.variables = tuple(support)
        self.index = {v: k for k, v in enumerate(self.variables)}
        self.original = tuple(A.get(v, 0) for v in self.variables)
        into: dict[str, list[int]] = {c.id: [] for c in inst.campaigns}
        out_of: dict[str, list[int]] = {}
        for k, (i, j) in enumerate(self.variables):
            into[j].append(k)
            out_of.setdefault(i, []).append(k)
        self.into, self.out_of = into, out_of
        self.goals = {c.id: c.goal for c in inst.campaigns}

        fixed: list[Row] = []
        budgets = inst.budgets
        for i in sorted(out_of):
            fixed.append(Row("All2", f"donor {i}", tuple((k, 1) for k in out_of[i]), LE, budgets[i]))
        if not cp or spec.cp_all3:
            for (i, j) in sorted(A):
                members = overlaps[(i, j)]
                terms = tuple((self.index[(i, y)], 1) for y in sorted(members))
                rhs = sum(A.get((i, x), 0) for x in members)
                fixed.append(Row("All3", f"contribution ({i},{j})", terms, LE, rhs))
        if cp:
            for (i, j) in sorted(A):
                rhs = sum(A.get((i, x), 0) for x in overlaps[(i, j)])
                fixed.append(Row("CP2", f"cap ({i},{j})", ((self.index[(i, j)], 1),), LE, rhs))
        if spec.scheme is Scheme.REPURPOSING:
            for j in sorted(self.base.funded):
                for k in into[j]:
                    fixed.append(Row("Rep", f"({self.variables[k][0]},{j})", ((k, 1),), EQ, self.original[k]))
        self.fixed_rows = fixed

        inflow = self.base.inflow
        nice = spec.nice_level.families
        self.nice1 = []
        if "Nice1" in nice:
            self.nice1 = [
                Row("Nice1", f"campaign {j}", tuple((k, 1) for k in into[j]), LE, inflow[j])
                for j in sorted(self.base.funded)
            ]
        self.nice3 = []
        if "Nice3" in nice:
            self.nice3 = [
                Row("Nice3", f"campaign {j}", tuple((k, 1) for k in into[j]), LE, self.goals[j])
                for j in inst.campaign_ids
                if j not in self.base.funded
            ]

        self.order_pairs: list[tuple[str, str, str]] = []
        if spec.scheme is Scheme.ORDERED_CP:
            for i, camps in sorted(inst.by_donor.items()):
                for x in camps:
                    for y in camps:
                        if x != y and order_triggered(A[(i, x)], self.goals[x], A[(i, y)], self.goals[y]):
                            self.order_pairs.append((i, x, y))

        pins = []
        for k, (i, j) in enumerate(self.variables):
            if i in spec.frozen_donors or j in spec.frozen_campaigns:
                pins.append(Row("Pin", f"({i},{j})", ((k, 1),), EQ, self.original[k]))
        self.pins = pins

    def build(self, success: Iterable[str]) -> ConstraintSystem:
        S = frozenset(success)
        missing = self.base.funded - S
        if missing:
            raise ModelError(f"success set drops a baseline winner: {sorted(missing)}")
        unknown = S - set(self.goals)
        if unknown:
            raise ModelError(f"unknown campaigns in success set: {sorted(unknown)}")
        into = self.into
        goal = [
            Row("Goal", f"campaign {j}", tuple((k, 1) for k in into[j]), GE, self.goals[j])
            for j in sorted(S)
        ]
        nice2 = []
        if "Nice2" in self.spec.nice_level.families:
            inflow = self.base.inflow
            nice2 = [
                Row("Nice2", f"campaign {j}", tuple((k, 1) for k in into[j]), LE, inflow[j])
                for j in self.instance.campaign_ids
                if j not in S
            ]
        order = []
        strict = self.spec.ordering is Ordering.STRICT
        for i, x, y in self.order_pairs:
            if strict or (x in S and y in S):
                kx, ky = self.index[(i, x)], self.index[(i, y)]
                order.append(Row("Order", f"donor {i}: {x} over {y}", ((kx, 1), (ky, -1)), GE, 0))
        rows = (
            goal
            + self.fixed_rows
            + self.nice1
            + nice2
            + self.nice3
            + order
            + self.pins
        )
        rows.sort(key=lambda r: FAMILY_ORDER.index(r.family))
        return ConstraintSystem(
            self.variables, tuple(rows), self.original, dict(self.instance.budgets), S, self.spec
        )


def build_constraints(instance: Instance, spec: SchemeSpec, success: Iterable[str]) -> ConstraintSystem:
    return ModelBuilder(instance, spec).build(success)
