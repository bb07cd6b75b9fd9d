"""Core data model: campaigns, contributions, instances and their validation.

Money is always an ``int`` number of cents and days are ``int`` ordinals, so
every comparison against a goal is exact.
"""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping

ERROR = "error"
WARNING = "warning"
INFO = "info"


@dataclass(frozen=True)
class Campaign:
    id: str
    goal: int
    start: int
    end: int

    @property
    def span(self) -> int:
        return self.end - self.start


@dataclass(frozen=True)
class Contribution:
    donor: str
    campaign: str
    amount: int
    date: int


@dataclass(frozen=True)
class Violation:
    severity: str
    location: str
    message: str

    def __str__(self) -> str:
        return f"[{self.severity}] {self.location}: {self.message}"


@dataclass
class ValidationReport:
    """Violations found in an instance or an input file.

    ``notes`` carries informational counters (e.g. dropped offline rows) that
    are not violations and do not make the report non-empty.
    """

    violations: list[Violation] = field(default_factory=list)
    notes: dict[str, int] = field(default_factory=dict)

    def add(self, severity: str, location: str, message: str) -> None:
        self.violations.append(Violation(severity, location, message))

    def extend(self, other: "ValidationReport") -> None:
        self.violations.extend(other.violations)
        for key, value in other.notes.items():
            self.notes[key] = self.notes.get(key, 0) + value

    @property
    def errors(self) -> list[Violation]:
        return [v for v in self.violations if v.severity == ERROR]

    def __len__(self) -> int:
        return len(self.violations)

    def __bool__(self) -> bool:
        return bool(self.violations)

    def __iter__(self):
        return iter(self.violations)


@dataclass(frozen=True)
class Instance:
    campaigns: tuple[Campaign, ...]
    contributions: tuple[Contribution, ...]
    provenance: str = ""

    def __post_init__(self):
        object.__setattr__(self, "campaigns", tuple(self.campaigns))
        object.__setattr__(self, "contributions", tuple(self.contributions))

    @cached_property
    def campaign_by_id(self) -> Mapping[str, Campaign]:
        return {c.id: c for c in self.campaigns}

    @cached_property
    def campaign_ids(self) -> tuple[str, ...]:
        return tuple(sorted(c.id for c in self.campaigns))

    @cached_property
    def donors(self) -> tuple[str, ...]:
        return tuple(sorted({c.donor for c in self.contributions}))

    @cached_property
    def amounts(self) -> Mapping[tuple[str, str], int]:
        """The contribution matrix as a sparse ``(donor, campaign) -> cents`` map."""
        out: dict[tuple[str, str], int] = {}
        for c in self.contributions:
            key = (c.donor, c.campaign)
            out[key] = out.get(key, 0) + c.amount
        return out

    @cached_property
    def dates(self) -> Mapping[tuple[str, str], int]:
        out: dict[tuple[str, str], int] = {}
        for c in self.contributions:
            key = (c.donor, c.campaign)
            out[key] = min(out.get(key, c.date), c.date)
        return out

    @cached_property
    def by_donor(self) -> Mapping[str, tuple[str, ...]]:
        """Campaigns each donor backed, sorted by id."""
        out: dict[str, set[str]] = defaultdict(set)
        for c in self.contributions:
            out[c.donor].add(c.campaign)
        return {d: tuple(sorted(cs)) for d, cs in out.items()}

    @cached_property
    def by_campaign(self) -> Mapping[str, tuple[str, ...]]:
        out: dict[str, set[str]] = defaultdict(set)
        for c in self.contributions:
            out[c.campaign].add(c.donor)
        return {j: tuple(sorted(ds)) for j, ds in out.items()}

    @cached_property
    def budgets(self) -> Mapping[str, int]:
        out: dict[str, int] = defaultdict(int)
        for c in self.contributions:
            out[c.donor] += c.amount
        return dict(out)

    @cached_property
    def inflow(self) -> Mapping[str, int]:
        out = {c.id: 0 for c in self.campaigns}
        for c in self.contributions:
            out[c.campaign] = out.get(c.campaign, 0) + c.amount
        return out

    def replace(self, *, campaigns=None, contributions=None, provenance=None) -> "Instance":
        return Instance(
            self.campaigns if campaigns is None else tuple(campaigns),
            self.contributions if contributions is None else tuple(contributions),
            self.provenance if provenance is None else provenance,
        )


@dataclass(frozen=True)
class BaselineOutcome:
    funded: frozenset[str]
    inflow: Mapping[str, int]


def validate_instance(instance: Instance) -> ValidationReport:
    """Check every invariant of the data model; violations are returned, never raised."""
    report = ValidationReport()
    seen_ids = Counter(c.id for c in instance.campaigns)
    for cid, n in sorted(seen_ids.items()):
        if n > 1:
            report.add(ERROR, f"campaign {cid}", "duplicate campaign id")
    for c in instance.campaigns:
        if not isinstance(c.goal, int) or c.goal <= 0:
            report.add(ERROR, f"campaign {c.id}", "goal must be a positive integer amount")
        if c.start > c.end:
            report.add(ERROR, f"campaign {c.id}", "start after end")

    campaigns = instance.campaign_by_id
    pairs = Counter((c.donor, c.campaign) for c in instance.contributions)
    for k, c in enumerate(instance.contributions):
        where = f"contribution {k} ({c.donor}->{c.campaign})"
        if not isinstance(c.amount, int) or c.amount <= 0:
            report.add(ERROR, where, "amount must be a positive integer")
        camp = campaigns.get(c.campaign)
        if camp is None:
            report.add(ERROR, where, "unknown campaign")
        elif not camp.start <= c.date <= camp.end:
            report.add(ERROR, where, "contribution outside campaign window")
    for (donor, cid), n in sorted(pairs.items()):
        if n > 1:
            report.add(ERROR, f"contribution ({donor}->{cid})", "unmerged duplicate contribution")
    return report


def baseline(instance: Instance) -> BaselineOutcome:
    inflow = dict(instance.inflow)
    funded = frozenset(c.id for c in instance.campaigns if inflow[c.id] >= c.goal)
    return BaselineOutcome(funded, inflow)


# -- reference fixtures ------------------------------------------------------
# Amounts below are dollars; stored values are cents.

def _build(name: str, camps: Iterable[tuple], contribs: Iterable[tuple]) -> Instance:
    return Instance(
        tuple(Campaign(cid, goal * 100, s, e) for cid, goal, s, e in camps),
        tuple(Contribution(d, j, amt * 100, day) for d, j, amt, day in contribs),
        provenance=f"fixture {name}",
    )


def fixture_e1() -> Instance:
    return _build("E1", [("A", 50, 1, 10), ("B", 50, 1, 10)], [("d", "A", 100, 2)])


def fixture_e2() -> Instance:
    return _build(
        "E2",
        [("A", 100, 1, 10), ("B", 30, 1, 10)],
        [("d", "A", 40, 2), ("e", "B", 20, 3)],
    )


def fixture_e3() -> Instance:
    return _build(
        "E3",
        [("A", 100, 1, 10), ("B", 15, 1, 10)],
        [("d", "A", 10, 2), ("d", "B", 45, 2), ("e", "A", 60, 3)],
    )


def fixture_e4() -> Instance:
    return _build(
        "E4",
        [("A", 50, 1, 10), ("B", 50, 20, 30)],
        [("d", "A", 100, 2), ("d", "B", 20, 21)],
    )


def fixture_e1_two_donors() -> Instance:
    """E1 plus a second donor ``e`` giving 10 to B, used by acceptance sweeps."""
    return _build(
        "E1b",
        [("A", 50, 1, 10), ("B", 50, 1, 10)],
        [("d", "A", 100, 2), ("e", "B", 10, 3)],
    )


FIXTURES = {
    "E1": fixture_e1,
    "E2": fixture_e2,
    "E3": fixture_e3,
    "E4": fixture_e4,
    "E1b": fixture_e1_two_donors,
}
