"""Summary tables and per-campaign flows for a solved instance.

Group statistics cover all campaigns, the baseline winners, the baseline
failures and the campaigns funded after redistribution.  The signed
difference from goal is ``goal - final inflow`` (negative when overfunded) and
its percentage is taken relative to the goal.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction

from .domain import Instance, baseline
from .solver import Solution

GROUPS = ("all", "baseline_successful", "baseline_failed", "post_success")

CAMPAIGN_FIELDS = (
    "campaign_id",
    "goal",
    "original",
    "deducted",
    "allocated",
    "final",
    "funded_before",
    "funded_after",
    "donors",
    "repeat_donors",
)

GROUP_FIELDS = (
    "group",
    "campaigns",
    "avg_goal",
    "avg_difference",
    "avg_difference_pct",
    "avg_donors",
    "avg_repeat_donors",
    "avg_repeat_share",
)


class ReportError(ValueError):
    pass


@dataclass(frozen=True)
class CampaignRecord:
    campaign_id: str
    goal: int
    original: int
    deducted: int | Fraction
    allocated: int | Fraction
    final: int | Fraction
    funded_before: bool
    funded_after: bool
    donors: int
    repeat_donors: int


@dataclass(frozen=True)
class GroupStats:
    group: str
    campaigns: int
    avg_goal: Fraction | None
    avg_difference: Fraction | None
    avg_difference_pct: Fraction | None
    avg_donors: Fraction | None
    avg_repeat_donors: Fraction | None
    avg_repeat_share: Fraction | None


@dataclass(frozen=True)
class ReportBundle:
    scheme: str = ""
    nice_level: str = ""
    campaigns: int = 0
    baseline_funded: int = 0
    funded: int = 0
    groups: tuple[GroupStats, ...] = ()
    per_campaign: tuple[CampaignRecord, ...] = field(default_factory=tuple)

    @property
    def baseline_rate(self) -> Fraction:
        return Fraction(self.baseline_funded, self.campaigns) if self.campaigns else Fraction(0)

    @property
    def funded_rate(self) -> Fraction:
        return Fraction(self.funded, self.campaigns) if self.campaigns else Fraction(0)


def _mean(values) -> Fraction | None:
    values = list(values)
    return Fraction(sum(values), len(values)) if values else None


def summarize(instance: Instance, solution: Solution) -> ReportBundle:
    ids = set(instance.campaign_by_id)
    if not solution.funded <= ids:
        raise ReportError("solution funds campaigns missing from the instance")
    donors = set(instance.donors)
    for (i, j) in solution.plan.values:
        if i not in donors or j not in ids:
            raise ReportError(f"plan entry ({i},{j}) does not belong to the instance")
    base = baseline(instance)
    if base.funded != solution.baseline:
        raise ReportError("solution baseline differs from the instance baseline")

    A = instance.amounts
    plan = solution.plan
    deducted = {j: 0 for j in ids}
    allocated = {j: 0 for j in ids}
    for key in set(A) | set(plan.values):
        a, r = A.get(key, 0), plan[key]
        j = key[1]
        if a > r:
            deducted[j] += a - r
        elif r > a:
            allocated[j] += r - a
    repeat = {d for d, camps in instance.by_donor.items() if len(camps) >= 2}

    records = []
    for c in sorted(instance.campaigns, key=lambda c: c.id):
        backers = instance.by_campaign.get(c.id, ())
        original = base.inflow[c.id]
        records.append(
            CampaignRecord(
                campaign_id=c.id,
                goal=c.goal,
                original=original,
                deducted=deducted[c.id],
                allocated=allocated[c.id],
                final=original - deducted[c.id] + allocated[c.id],
                funded_before=c.id in base.funded,
                funded_after=c.id in solution.funded,
                donors=len(backers),
                repeat_donors=sum(1 for d in backers if d in repeat),
            )
        )

    members = {
        "all": records,
        "baseline_successful": [r for r in records if r.funded_before],
        "baseline_failed": [r for r in records if not r.funded_before],
        "post_success": [r for r in records if r.funded_after],
    }
    groups = []
    for name in GROUPS:
        rs = members[name]
        groups.append(
            GroupStats(
                group=name,
                campaigns=len(rs),
                avg_goal=_mean(r.goal for r in rs),
                avg_difference=_mean(r.goal - r.final for r in rs),
                avg_difference_pct=_mean(Fraction(100 * (r.goal - r.final), r.goal) for r in rs),
                avg_donors=_mean(r.donors for r in rs),
                avg_repeat_donors=_mean(r.repeat_donors for r in rs),
                avg_repeat_share=_mean(Fraction(r.repeat_donors, r.donors) for r in rs if r.donors),
            )
        )
    return ReportBundle(
        scheme=solution.spec.label,
        nice_level=solution.nice_level.value,
        campaigns=len(records),
        baseline_funded=len(base.funded),
        funded=len(solution.funded),
        groups=tuple(groups),
        per_campaign=tuple(records),
    )


# -- serialization -----------------------------------------------------------------


def _json_value(v):
    if isinstance(v, Fraction):
        return v.numerator if v.denominator == 1 else round(float(v), 6)
    return v


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, Fraction):
        return str(v.numerator) if v.denominator == 1 else f"{float(v):.6f}"
    return str(v)


def _csv(fields, rows) -> bytes:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(fields)
    for row in rows:
        w.writerow([_cell(getattr(row, f)) for f in fields])
    return buf.getvalue().encode()


def emit(bundle: ReportBundle, fmt: str, section: str = "campaigns") -> bytes:
    """Serialize ``bundle``.

    ``fmt="json"`` writes one object with keys ``counts``, ``by_group`` and
    ``per_campaign``.  ``fmt="csv"`` writes one section: ``"campaigns"``
    (per-campaign flows) or ``"groups"`` (group averages).  Field order is
    fixed by :data:`CAMPAIGN_FIELDS` and :data:`GROUP_FIELDS`.
    """
    if fmt == "json":
        doc = {
            "counts": {
                "scheme": bundle.scheme,
                "nice_level": bundle.nice_level,
                "campaigns": bundle.campaigns,
                "baseline_funded": bundle.baseline_funded,
                "funded": bundle.funded,
                "baseline_rate": _json_value(bundle.baseline_rate),
                "funded_rate": _json_value(bundle.funded_rate),
            },
            "by_group": {g.group: {f: _json_value(getattr(g, f)) for f in GROUP_FIELDS[1:]} for g in bundle.groups},
            "per_campaign": [{f: _json_value(getattr(r, f)) for f in CAMPAIGN_FIELDS} for r in bundle.per_campaign],
        }
        return (json.dumps(doc, indent=2) + "\n").encode()
    if fmt == "csv":
        if section == "campaigns":
            return _csv(CAMPAIGN_FIELDS, bundle.per_campaign)
        if section == "groups":
            return _csv(GROUP_FIELDS, bundle.groups)
        raise ReportError(f"unknown csv section {section!r}")
    raise ReportError(f"unknown format {fmt!r}")
