"""Monte Carlo sweeps over the share of donors or organizers accepting redistribution.

Random draws come from PCG64 seeded through :class:`numpy.random.SeedSequence`
with ``spawn_key=(point_index, sample_index)``.  Only the generator's raw
64-bit outputs are used, fed into a Fisher-Yates shuffle written here, so the
accepted sets depend on the PCG64 definition alone and not on numpy's
sampling helpers.
"""

from __future__ import annotations

import csv
import enum
import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from decimal import Decimal
from fractions import Fraction
from math import floor
from typing import Sequence

import numpy as np

from .domain import Instance
from .model import SchemeSpec
from .solver import DEFAULT_MAX_CHECKS, solve

DEFAULT_PERCENTAGES = tuple(range(0, 101, 10))
DEFAULT_SAMPLES = 30

_TWO64 = 1 << 64
# substream index reserved for nested chains, outside any realistic sweep
CHAIN_POINT = (1 << 32) - 1


class ScenarioError(ValueError):
    pass


class Kind(str, enum.Enum):
    DONOR = "donor"
    ORGANIZER = "organizer"


@dataclass(frozen=True)
class AcceptanceScenario:
    kind: Kind
    accepted: frozenset[str]
    percentage: Fraction
    seed: int

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        object.__setattr__(self, "accepted", frozenset(self.accepted))


@dataclass(frozen=True)
class SweepPoint:
    percentage: Fraction
    mean: float
    stddev: float
    samples: int
    values: tuple[int, ...]


@dataclass(frozen=True)
class SweepCurve:
    kind: Kind
    points: tuple[SweepPoint, ...]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["p", "mean", "stddev", "samples"])
        for pt in self.points:
            w.writerow([_fmt_pct(pt.percentage), repr(pt.mean), repr(pt.stddev), pt.samples])
        return buf.getvalue()


def _fmt_pct(p: Fraction) -> str:
    return str(p.numerator) if p.denominator == 1 else str(float(p))


def _as_fraction(p) -> Fraction:
    if isinstance(p, float):
        return Fraction(Decimal(repr(p)))
    return Fraction(p)


def population(instance: Instance, kind: Kind) -> tuple[str, ...]:
    return instance.donors if Kind(kind) is Kind.DONOR else instance.campaign_ids


def accepted_count(percentage, size: int) -> int:
    """``round(p% of size)`` with halves rounded up, computed exactly."""
    p = _as_fraction(percentage)
    if not 0 <= p <= 100:
        raise ScenarioError(f"percentage {percentage} outside [0, 100]")
    return floor(p * size / 100 + Fraction(1, 2))


def _stream(seed: int, point: int, sample: int) -> np.random.PCG64:
    return np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(point, sample)))


def _below(bits: np.random.PCG64, bound: int) -> int:
    """Uniform integer in ``[0, bound)`` by rejection on raw 64-bit words."""
    limit = _TWO64 - _TWO64 % bound
    while True:
        r = int(bits.random_raw())
        if r < limit:
            return r % bound


def permutation(items: Sequence[str], seed: int, point: int = 0, sample: int = 0) -> list[str]:
    out = list(items)
    bits = _stream(seed, point, sample)
    for i in range(len(out) - 1, 0, -1):
        j = _below(bits, i + 1)
        out[i], out[j] = out[j], out[i]
    return out


def draw_scenario(instance: Instance, kind, percentage, seed: int, point: int = 0, sample: int = 0) -> AcceptanceScenario:
    kind = Kind(kind)
    pop = population(instance, kind)
    k = accepted_count(percentage, len(pop))
    order = permutation(pop, seed, point, sample)
    return AcceptanceScenario(kind, frozenset(order[:k]), _as_fraction(percentage), seed)


def nested_chain(instance: Instance, kind, percentages: Sequence, seed: int, chain: int = 0) -> list[AcceptanceScenario]:
    """Scenarios whose accepted sets grow with ``percentages`` (prefixes of one shuffle)."""
    kind = Kind(kind)
    pop = population(instance, kind)
    order = permutation(pop, seed, point=CHAIN_POINT, sample=chain)
    pcts = sorted(_as_fraction(p) for p in percentages)
    return [AcceptanceScenario(kind, frozenset(order[: accepted_count(p, len(pop))]), p, seed) for p in pcts]


def apply_scenario(instance: Instance, spec: SchemeSpec, scenario: AcceptanceScenario) -> SchemeSpec:
    """``spec`` with every non-accepting donor or campaign pinned to R = A."""
    pop = set(population(instance, scenario.kind))
    unknown = scenario.accepted - pop
    if unknown:
        raise ScenarioError(f"scenario accepts unknown {scenario.kind.value} ids: {sorted(unknown)}")
    rejected = frozenset(pop - scenario.accepted)
    if scenario.kind is Kind.DONOR:
        return replace(spec, frozen_donors=spec.frozen_donors | rejected)
    return replace(spec, frozen_campaigns=spec.frozen_campaigns | rejected)


def _objective(args) -> int:
    instance, spec, max_checks = args
    return solve(instance, spec, max_checks=max_checks, tiebreak=False).objective


def sweep(
    instance: Instance,
    spec: SchemeSpec,
    kind,
    percentages: Sequence = DEFAULT_PERCENTAGES,
    samples_per_point: int = DEFAULT_SAMPLES,
    seed: int = 0,
    *,
    jobs: int = 1,
    max_checks: int | None = DEFAULT_MAX_CHECKS,
) -> SweepCurve:
    """Mean and standard deviation of the funded count at each acceptance rate.

    Identical accepted sets are solved once.  With ``jobs > 1`` distinct
    scenarios are solved in worker processes; results land in fixed slots so
    the curve does not depend on completion order.
    """
    if samples_per_point < 1:
        raise ScenarioError("samples_per_point must be at least 1")
    kind = Kind(kind)
    pcts = [_as_fraction(p) for p in percentages]
    scenarios = [
        [draw_scenario(instance, kind, p, seed, point, s) for s in range(samples_per_point)]
        for point, p in enumerate(pcts)
    ]
    distinct: dict[frozenset, int] = {}
    for row in scenarios:
        for sc in row:
            distinct.setdefault(sc.accepted, len(distinct))
    specs = [None] * len(distinct)
    for row in scenarios:
        for sc in row:
            slot = distinct[sc.accepted]
            if specs[slot] is None:
                specs[slot] = apply_scenario(instance, spec, sc)
    work = [(instance, s, max_checks) for s in specs]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            values = list(pool.map(_objective, work))
    else:
        values = [_objective(w) for w in work]
    points = []
    for p, row in zip(pcts, scenarios):
        vals = tuple(values[distinct[sc.accepted]] for sc in row)
        mean = Fraction(sum(vals), len(vals))
        var = sum((v - mean) ** 2 for v in vals) / len(vals)
        points.append(SweepPoint(p, float(mean), _sqrt(var), len(vals), vals))
    return SweepCurve(kind, tuple(points))


def _sqrt(value: Fraction) -> float:
    return float(value) ** 0.5 if value else 0.0
