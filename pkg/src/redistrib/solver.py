"""Maximize the number of funded campaigns over success sets.

The instance is split into independent components of the donor-campaign
support graph (no money can move between components), each component is
searched separately and the results are merged.

Within a component the exact search is a depth-first branch and bound over the
non-baseline campaigns in ascending id order, fund-branch first, so the first
largest set it meets is also the lexicographically smallest one.  Components too
large for exhaustive search fall back to a budgeted search whose answer is
still a certified feasible set; the solution then reports ``optimal=False``
and the best proven upper bound.

Nice levels form a ladder.  The objective is the best count reachable at the
weakest level; the level reported is the first one, from the requested level
downwards, at which that count is achieved.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable

from .domain import Contribution, Instance, baseline
from .feasibility import RedistributionPlan, check_feasible, optimize_tiebreak
from .feasibility.core import EXACT_MAX_VARS, AuditError
from .feasibility.highs import FEASIBLE
from .model import (
    ModelBuilder,
    NiceLevel,
    Ordering,
    Scheme,
    SchemeSpec,
    build_constraints,
)

EXACT_MAX_CANDIDATES = 24
BRUTE_FORCE_LIMIT = 16
# feasibility checks for a large component of REFERENCE_VARS variables; smaller
# components get proportionally more, since each check is cheaper
DEFAULT_MAX_CHECKS = 16
REFERENCE_VARS = 150_000


class SolverRefusal(ValueError):
    pass


@dataclass
class ComponentStats:
    campaigns: tuple[str, ...]
    candidates: int
    funded: int = 0
    nodes: int = 0
    checks: int = 0
    method: str = "exact"
    level: str = ""
    optimal: bool = True
    upper_bound: int = 0


@dataclass(frozen=True)
class Solution:
    funded: frozenset[str]
    plan: RedistributionPlan
    nice_level: NiceLevel
    ordering: Ordering
    spec: SchemeSpec
    baseline: frozenset[str]
    components: tuple[ComponentStats, ...] = ()
    optimal: bool = True
    upper_bound: int = 0

    @property
    def objective(self) -> int:
        return len(self.funded)

    @property
    def downgraded(self) -> bool:
        return self.nice_level is not self.spec.nice_level

    @property
    def nodes(self) -> int:
        return sum(c.nodes for c in self.components)

    @property
    def checks(self) -> int:
        return sum(c.checks for c in self.components)


# -- decomposition --------------------------------------------------------------------


def support_components(instance: Instance, spec: SchemeSpec) -> list[Instance]:
    """Split into sub-instances that share no donor and no reachable campaign."""
    builder = ModelBuilder(instance, spec)
    parent = {c: c for c in instance.campaign_ids}

    def find(c):
        while parent[c] != c:
            parent[c] = parent[parent[c]]
            c = parent[c]
        return c

    anchor: dict[str, str] = {}
    for donor, camp in builder.variables:
        a = anchor.setdefault(donor, camp)
        ra, rc = find(a), find(camp)
        if ra != rc:
            parent[max(ra, rc)] = min(ra, rc)
    groups: dict[str, list[str]] = {}
    for c in instance.campaign_ids:
        groups.setdefault(find(c), []).append(c)
    out = []
    for root in sorted(groups):
        members = set(groups[root])
        out.append(
            Instance(
                tuple(c for c in instance.campaigns if c.id in members),
                tuple(c for c in instance.contributions if c.campaign in members),
                instance.provenance,
            )
        )
    return out


def _restrict_spec(spec: SchemeSpec, sub: Instance) -> SchemeSpec:
    from dataclasses import replace

    return replace(
        spec,
        frozen_donors=spec.frozen_donors & set(sub.donors),
        frozen_campaigns=spec.frozen_campaigns & set(sub.campaign_by_id),
    )


# -- per-component search ----------------------------------------------------------------


class _Component:
    def __init__(self, sub: Instance, spec: SchemeSpec, cache: dict | None, max_checks: int | None):
        self.sub = sub
        self.spec = _restrict_spec(spec, sub)
        self.base = baseline(sub).funded
        self.candidates = sorted(c for c in sub.campaign_ids if c not in self.base)
        self.goals = {c.id: c.goal for c in sub.campaigns}
        self.money = sum(sub.budgets.values())
        self.cache = cache
        self.max_checks = max_checks
        self.builders: dict[NiceLevel, ModelBuilder] = {}
        self.memo: dict[tuple[NiceLevel, frozenset], bool] = {}
        self.witness: dict[tuple[NiceLevel, frozenset], object] = {}
        first = self._builder(self.spec.nice_level)
        self.nvars = len(first.variables)
        self.parametric = None
        self.stats = ComponentStats(tuple(sub.campaign_ids), len(self.candidates))
        self.monotone = not (self.spec.scheme is Scheme.ORDERED_CP and self.spec.ordering is Ordering.STRICT)
        self.uncertified = 0

    def _builder(self, level: NiceLevel) -> ModelBuilder:
        if level not in self.builders:
            self.builders[level] = ModelBuilder(self.sub, self.spec.at_level(level))
        return self.builders[level]

    @property
    def large(self) -> bool:
        return self.nvars > EXACT_MAX_VARS

    def feasible(self, S: frozenset, level: NiceLevel) -> bool:
        key = (level, S)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        order = list(NiceLevel)
        # a plan at a stronger level also works at a weaker one, and vice versa for failures
        for other in order:
            known = self.memo.get((other, S))
            if known is None:
                continue
            if known and order.index(other) <= order.index(level):
                self.memo[key] = True
                return True
            if not known and order.index(other) >= order.index(level):
                self.memo[key] = False
                return False
        self.stats.checks += 1
        if self.large:
            if self.parametric is None:
                from .feasibility.parametric import SuccessSetModel

                self.parametric = SuccessSetModel(self._builder(self.spec.nice_level))
            status, x = self.parametric.check(S, level)
            ok = status == FEASIBLE
            if status not in (FEASIBLE, "infeasible"):
                self.uncertified += 1
            if ok:
                self.witness[key] = x
        else:
            cs = self._builder(level).build(S)
            ok = check_feasible(cs, backend="exact", cache=self.cache).feasible
        self.memo[key] = ok
        return ok

    def money_bound(self, chosen: Iterable[str], remaining: list[str]) -> int:
        used = sum(self.goals[c] for c in self.base) + sum(self.goals[c] for c in chosen)
        left = self.money - used
        n = 0
        for g in sorted(self.goals[c] for c in remaining):
            if g > left:
                break
            left -= g
            n += 1
        return n

    # -- exact branch and bound ----------------------------------------------------

    def exact(self, level: NiceLevel, target: int | None = None) -> frozenset:
        """Lexicographically smallest maximum set at ``level`` (size ``target`` if given)."""
        base = frozenset(self.base)
        cands = self.candidates
        if self.monotone:
            cands = [c for c in cands if self.feasible(base | {c}, level)]
        best: list = [None, -1]
        done = [False]

        def record(S: frozenset):
            if len(S) > best[1]:
                best[0], best[1] = S, len(S)
                if target is not None and len(S) >= target:
                    done[0] = True

        def visit(idx: int, F: frozenset):
            if done[0]:
                return
            self.stats.nodes += 1
            remaining = cands[idx:]
            extra = min(len(remaining), self.money_bound(F - base, remaining))
            bound = len(F) + extra
            if bound <= best[1] or (target is not None and bound < target):
                return
            if self.monotone:
                if remaining and extra == len(remaining) and self.feasible(F | set(remaining), level):
                    record(F | set(remaining))
                    return
                if not remaining:
                    record(F)
                    return
                c = remaining[0]
                if self.feasible(F | {c}, level):
                    visit(idx + 1, F | {c})
                visit(idx + 1, F)
                return
            if not remaining:
                if self.feasible(F, level):
                    record(F)
                return
            visit(idx + 1, F | {remaining[0]})
            visit(idx + 1, F)

        visit(0, base)
        return best[0] if best[0] is not None else base

    # -- budgeted search for large components ------------------------------------------

    def budgeted(self, level: NiceLevel) -> frozenset:
        base = frozenset(self.base)
        order = sorted(self.candidates, key=lambda c: (self.goals[c], c))
        checks0 = self.stats.checks
        budget = self.max_checks
        if budget is not None:
            budget = max(budget, budget * REFERENCE_VARS // max(self.nvars, 1))

        def spent():
            return budget is not None and self.stats.checks - checks0 >= budget

        lo = 0
        if self.monotone:
            hi = min(len(order), self.money_bound((), order))
            while lo < hi and not spent():
                mid = (lo + hi + 1) // 2
                if self.feasible(base | set(order[:mid]), level):
                    lo = mid
                else:
                    hi = mid - 1
        S = base | set(order[:lo])
        for c in order[lo:]:
            if spent():
                break
            self.stats.nodes += 1
            if self.money_bound(S - base, [c]) == 0:
                continue
            if self.feasible(S | {c}, level):
                S = S | {c}
        return S

    def upper_bound(self) -> int:
        return len(self.base) + min(len(self.candidates), self.money_bound((), self.candidates))

    def best(self, level: NiceLevel, target: int | None = None) -> frozenset:
        if len(self.candidates) <= EXACT_MAX_CANDIDATES:
            return self.exact(level, target)
        self.stats.method = "budgeted"
        return self.budgeted(level)


# -- public API -----------------------------------------------------------------------------


def _levels(spec: SchemeSpec) -> list[NiceLevel]:
    return spec.nice_level.ladder() if spec.ladder else [spec.nice_level]


def _merge_plans(plans: list[RedistributionPlan]) -> RedistributionPlan:
    values = {}
    rational = False
    for p in plans:
        values.update(p.values)
        rational = rational or p.rational
    return RedistributionPlan(values, rational)


def _component_plan(comp: _Component, S: frozenset, level: NiceLevel, spec: SchemeSpec, tiebreak: bool):
    cs = comp._builder(level).build(S)
    if tiebreak and spec.tiebreak and not comp.large:
        return optimize_tiebreak(cs, backend="exact")
    x = comp.witness.get((level, S))
    if x is not None:
        return RedistributionPlan.from_vector(cs, [int(v) for v in x])
    if comp.large:
        if comp.parametric is None:
            comp.feasible(S, level)
        status, x = comp.parametric.check(S, level)
        if status == FEASIBLE:
            return RedistributionPlan.from_vector(cs, [int(v) for v in x])
    result = check_feasible(cs, backend="exact" if not comp.large else "auto", cache=comp.cache)
    if not result.feasible:
        raise AuditError("chosen success set is not feasible")
    return result.plan


def _finish(instance, spec, comps, chosen, level, tiebreak) -> Solution:
    base = baseline(instance).funded
    plans = [_component_plan(c, S, level, spec, tiebreak) for c, S in zip(comps, chosen)]
    plan = _merge_plans(plans)
    funded = frozenset().union(*chosen) if chosen else frozenset(base)
    for c, S in zip(comps, chosen):
        c.stats.funded = len(S)
    optimal = all(c.stats.optimal for c in comps)
    ub = sum(c.stats.upper_bound for c in comps)
    return Solution(
        funded=funded,
        plan=plan,
        nice_level=level,
        ordering=spec.ordering,
        spec=spec,
        baseline=base,
        components=tuple(c.stats for c in comps),
        optimal=optimal,
        upper_bound=ub,
    )


def _weakest(levels: list[NiceLevel]) -> NiceLevel:
    order = list(NiceLevel)
    return max(levels, key=order.index)


def solve(
    instance: Instance,
    spec: SchemeSpec | None = None,
    *,
    cache: dict | None = None,
    max_checks: int | None = DEFAULT_MAX_CHECKS,
    tiebreak: bool = True,
) -> Solution:
    """Largest fundable success set for ``spec`` (see module docstring).

    ``max_checks`` caps feasibility checks per large component and ladder level,
    scaled up for components smaller than ``REFERENCE_VARS`` variables. This
    keeps runs deterministic without wall-clock limits; ``None`` removes the cap.  ``cache`` may be
    shared across calls on the same instance.
    """
    spec = spec or SchemeSpec()
    levels = _levels(spec)
    comps = [_Component(sub, spec, cache, max_checks) for sub in support_components(instance, spec)]
    per_level = []
    for comp in comps:
        weakest = levels[-1]
        top = comp.best(weakest)
        k = len(top)
        first = weakest
        for lvl in levels[:-1]:
            if comp.stats.method == "exact":
                S = comp.exact(lvl, target=k)
                ok = len(S) >= k
            else:
                ok = comp.feasible(top, lvl)
            if ok:
                first = lvl
                break
        comp.stats.level = first.value
        comp.stats.upper_bound = k if comp.stats.method == "exact" else comp.upper_bound()
        comp.stats.optimal = comp.stats.method == "exact" or k == comp.stats.upper_bound
        per_level.append((k, first, top))
    level = _weakest([lvl for _, lvl, _ in per_level]) if per_level else levels[0]
    chosen = []
    for comp, (k, first, top) in zip(comps, per_level):
        if comp.stats.method == "exact":
            chosen.append(comp.exact(level, target=k))
        else:
            chosen.append(top)
        if comp.uncertified:
            comp.stats.optimal = False
    return _finish(instance, spec, comps, chosen, level, tiebreak)


def brute_force(
    instance: Instance, spec: SchemeSpec | None = None, *, cache: dict | None = None, tiebreak: bool = True
) -> Solution:
    """Exhaustive enumeration of success sets per component (reference for tests).

    Refuses components with more than 16 non-baseline campaigns.
    """
    spec = spec or SchemeSpec()
    levels = _levels(spec)
    comps = [_Component(sub, spec, cache, None) for sub in support_components(instance, spec)]
    for comp in comps:
        if len(comp.candidates) > BRUTE_FORCE_LIMIT:
            raise SolverRefusal(
                f"component has {len(comp.candidates)} non-baseline campaigns (limit {BRUTE_FORCE_LIMIT})"
            )

    def best_at(comp: _Component, level: NiceLevel) -> frozenset:
        base = frozenset(comp.base)
        cands = comp.candidates
        for size in range(len(cands), -1, -1):
            for extra in combinations(cands, size):  # lexicographic order
                S = base | set(extra)
                comp.stats.nodes += 1
                cs = comp._builder(level).build(S)
                comp.stats.checks += 1
                if check_feasible(cs, backend="exact", cache=cache).feasible:
                    return S
        return base

    found = []
    for comp in comps:
        by_level = {lvl: best_at(comp, lvl) for lvl in levels}
        k = len(by_level[levels[-1]])
        first = next(lvl for lvl in levels if len(by_level[lvl]) == k)
        comp.stats.level = first.value
        comp.stats.method = "enumerate"
        comp.stats.upper_bound = k
        found.append((by_level, first))
    level = _weakest([first for _, first in found]) if found else levels[0]
    chosen = [by_level[level] for by_level, _ in found]
    return _finish(instance, spec, comps, chosen, level, tiebreak)


def verify_solution(instance: Instance, solution: Solution) -> bool:
    """Re-check the merged plan against the full system for the funded set."""
    cs = build_constraints(instance, solution.spec.at_level(solution.nice_level), solution.funded)
    return cs.is_satisfied_by(solution.plan.vector(cs))
