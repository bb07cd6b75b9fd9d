"""Independent reference decisions for tiny instances.

Nothing here imports the production model or feasibility code: the
constraints are re-derived directly from the instance and decided with a
plain dense tableau over :class:`fractions.Fraction`.  Agreement between the
two paths is the point, so keep this module boring and separate.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from math import gcd, lcm

from .domain import Instance

MAX_DONORS = 4
MAX_CAMPAIGNS = 4

_NICE = {
    "all3nice": {"Nice1", "Nice2", "Nice3"},
    "nice12": {"Nice1", "Nice2"},
    "nice1only": {"Nice1"},
    "nonenice": set(),
}


class OracleSizeError(ValueError):
    pass


def _field(spec, name, default=None):
    value = getattr(spec, name, default)
    return getattr(value, "value", value)


def _rows(instance: Instance, spec, success) -> tuple[list, list[tuple[dict, str, Fraction]]]:
    camps = {c.id: c for c in instance.campaigns}
    amount: dict[tuple[str, str], int] = {}
    date: dict[tuple[str, str], int] = {}
    for c in instance.contributions:
        amount[(c.donor, c.campaign)] = amount.get((c.donor, c.campaign), 0) + c.amount
        date[(c.donor, c.campaign)] = min(date.get((c.donor, c.campaign), c.date), c.date)
    donors = sorted({d for d, _ in amount})
    raised = {j: sum(a for (_, x), a in amount.items() if x == j) for j in camps}
    winners = {j for j in camps if raised[j] >= camps[j].goal}
    scheme = _field(spec, "scheme")
    keeps_choice = scheme in ("unordered", "ordered")

    def window(i, j):
        d, end = date[(i, j)], camps[j].end
        if keeps_choice:
            return {x for (k, x) in amount if k == i and camps[x].end >= d and date[(i, x)] <= end}
        return {x for x in camps if camps[x].end >= d and camps[x].start <= end}

    windows = {key: window(*key) for key in amount}
    if keeps_choice:
        allowed = set(amount)
    else:
        allowed = {(i, y) for (i, j) in amount for y in windows[(i, j)]}
    var = sorted(allowed)
    rows: list[tuple[dict, str, Fraction]] = []

    def row(coefs, sense, rhs):
        rows.append(({v: Fraction(c) for v, c in coefs.items()}, sense, Fraction(rhs)))

    def into(j):
        return {v: 1 for v in var if v[1] == j}

    for j in sorted(success):
        row(into(j), ">=", camps[j].goal)
    for i in donors:
        row({v: 1 for v in var if v[0] == i}, "<=", sum(a for (k, _), a in amount.items() if k == i))
    if not keeps_choice or _field(spec, "cp_all3", True):
        for (i, j), members in windows.items():
            row({(i, y): 1 for y in members if (i, y) in allowed}, "<=", sum(amount.get((i, x), 0) for x in members))
    if keeps_choice:
        for (i, j), members in windows.items():
            row({(i, j): 1}, "<=", sum(amount.get((i, x), 0) for x in members))
    if scheme == "repurposing":
        for v in var:
            if v[1] in winners:
                row({v: 1}, "==", amount.get(v, 0))
    nice = _NICE[_field(spec, "nice_level")]
    for j in sorted(camps):
        if j in winners and "Nice1" in nice:
            row(into(j), "<=", raised[j])
        if j not in winners and j not in success and "Nice2" in nice:
            row(into(j), "<=", raised[j])
        if j not in winners and "Nice3" in nice:
            row(into(j), "<=", camps[j].goal)
    if scheme == "ordered":
        strict = _field(spec, "ordering") == "strict"
        for i in donors:
            mine = [x for (k, x) in amount if k == i]
            for x in mine:
                for y in mine:
                    ax, ay = amount[(i, x)], amount[(i, y)]
                    gx, gy = camps[x].goal, camps[y].goal
                    more = ax > ay and Fraction(ax, gx) > Fraction(ay, gy)
                    if x != y and more and (strict or (x in success and y in success)):
                        row({(i, x): 1, (i, y): -1}, ">=", 0)
    pinned_d = set(getattr(spec, "frozen_donors", ()) or ())
    pinned_c = set(getattr(spec, "frozen_campaigns", ()) or ())
    for v in var:
        if v[0] in pinned_d or v[1] in pinned_c:
            row({v: 1}, "==", amount.get(v, 0))
    return var, rows


def _integral(coefs: list[Fraction], rhs: Fraction) -> tuple[list[int], int]:
    scale = lcm(*(c.denominator for c in coefs), rhs.denominator)
    return [int(c * scale) for c in coefs], int(rhs * scale)


def _reduce(line: list[int]) -> list[int]:
    g = gcd(*line)
    return [v // g for v in line] if g > 1 else line


def _phase_one(n: int, rows: list[tuple[list[Fraction], str, Fraction]]) -> bool:
    """Dense textbook phase one on an integer tableau: is {x >= 0 : rows} nonempty?

    Each tableau row is kept as a primitive integer vector (a positive multiple
    of the rational row), so pivots need no fractions.  Bland's rule.
    """
    norm = []
    for coefs, sense, rhs in rows:
        ints, b = _integral(coefs, rhs)
        if b < 0:
            ints, b = [-c for c in ints], -b
            sense = {"<=": ">=", ">=": "<="}.get(sense, sense)
        norm.append((ints, sense, b))
    n_slack = sum(1 for _, sense, _ in norm if sense != "==")
    n_art = sum(1 for _, sense, _ in norm if sense != "<=")
    total = n + n_slack + n_art
    if not n_art:
        return True
    tab: list[list[int]] = []
    basis: list[int] = []
    slack, art = n, n + n_slack
    artificial_rows = []
    for ints, sense, b in norm:
        line = ints + [0] * (total - n) + [b]
        if sense != "==":
            line[slack] = 1 if sense == "<=" else -1
        if sense == "<=":
            basis.append(slack)
        else:
            line[art] = 1
            basis.append(art)
            artificial_rows.append(len(tab))
            art += 1
        if sense != "==":
            slack += 1
        tab.append(line)
    # reduced costs of "minimize the sum of artificials"
    cost = [0] * (total + 1)
    for r in artificial_rows:
        cost = [c - v for c, v in zip(cost, tab[r])]
    for c in range(n + n_slack, total):
        cost[c] += 1
    while True:
        enter = next((c for c in range(total) if cost[c] < 0), None)
        if enter is None:
            break
        leave = None
        for r, line in enumerate(tab):
            a = line[enter]
            if a > 0:
                if leave is None:
                    leave = r
                    continue
                lhs, rhs = line[-1] * tab[leave][enter], tab[leave][-1] * a
                if lhs < rhs or (lhs == rhs and basis[r] < basis[leave]):
                    leave = r
        if leave is None:
            break  # cannot happen in phase one (bounded below by zero)
        pivot_row = tab[leave]
        piv = pivot_row[enter]
        for r, line in enumerate(tab):
            f = line[enter]
            if r != leave and f:
                tab[r] = _reduce([piv * a - f * b for a, b in zip(line, pivot_row)])
        f = cost[enter]
        cost = _reduce([piv * a - f * b for a, b in zip(cost, pivot_row)])
        basis[leave] = enter
    return cost[-1] == 0


def oracle_feasible(instance: Instance, spec, success) -> bool:
    """Whether some plan satisfies every constraint of ``spec`` with ``success`` funded."""
    donors = {c.donor for c in instance.contributions}
    if len(donors) > MAX_DONORS or len(instance.campaigns) > MAX_CAMPAIGNS:
        raise OracleSizeError(f"oracle limited to {MAX_DONORS} donors and {MAX_CAMPAIGNS} campaigns")
    success = set(success)
    var, rows = _rows(instance, spec, success)
    index = {v: k for k, v in enumerate(var)}
    dense = []
    for coefs, sense, rhs in rows:
        line = [Fraction(0)] * len(var)
        for v, c in coefs.items():
            line[index[v]] += c
        dense.append((line, sense, rhs))
    return _phase_one(len(var), dense)


def oracle_optimum(instance: Instance, spec) -> int:
    """Largest feasible success set size by enumerating every superset of the baseline winners."""
    raised: dict[str, int] = {}
    for c in instance.contributions:
        raised[c.campaign] = raised.get(c.campaign, 0) + c.amount
    winners = {c.id for c in instance.campaigns if raised.get(c.id, 0) >= c.goal}
    others = sorted(c.id for c in instance.campaigns if c.id not in winners)
    for size in range(len(others), -1, -1):
        for extra in combinations(others, size):
            if oracle_feasible(instance, spec, winners | set(extra)):
                return len(winners) + size
    return len(winners)
