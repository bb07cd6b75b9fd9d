"""Reading donation traces and generating synthetic ones.

File formats (UTF-8 CSV, base-10 integers, no locale handling)::

    campaigns.csv   campaign_id,goal_cents,start_day,end_day
    donations.csv   donor_id,campaign_id,amount_cents,day,offline

Offline rows are dropped because the platform never held those funds.
Repeated (donor, campaign) rows are merged into one contribution carrying
the summed amount and the first date.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass

import numpy as np

from .domain import ERROR, INFO, Campaign, Contribution, Instance, ValidationReport, validate_instance

CAMPAIGN_HEADER = ("campaign_id", "goal_cents", "start_day", "end_day")
DONATION_HEADER = ("donor_id", "campaign_id", "amount_cents", "day", "offline")

LATE_DAYS = 7


class TraceParseError(ValueError):
    """Malformed input; ``row`` is the 1-based line number in the file (header is line 1)."""

    def __init__(self, filename: str, row: int, message: str):
        super().__init__(f"{filename}, row {row}: {message}")
        self.filename = filename
        self.row = row


class ParameterError(ValueError):
    pass


def _rows(data: bytes | str, header: tuple[str, ...], filename: str):
    text = data.decode("utf-8") if isinstance(data, (bytes, bytearray)) else data
    reader = csv.reader(io.StringIO(text))
    try:
        head = next(reader)
    except StopIteration:
        raise TraceParseError(filename, 1, "empty file") from None
    if tuple(h.strip() for h in head) != header:
        raise TraceParseError(filename, 1, f"expected header {','.join(header)}")
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != len(header):
            raise TraceParseError(filename, lineno, f"expected {len(header)} fields, got {len(row)}")
        yield lineno, [cell.strip() for cell in row]


def _int(value: str, filename: str, lineno: int, what: str) -> int:
    # int() accepts "1_000" and unicode digits; keep to plain ASCII base-10
    body = value[1:] if value[:1] == "-" else value
    if not body or not body.isascii() or not body.isdigit():
        raise TraceParseError(filename, lineno, f"unparseable {what}: {value!r}")
    return int(value)


def parse_trace(campaign_data: bytes | str, donation_data: bytes | str, provenance: str = "") -> tuple[Instance, ValidationReport]:
    campaigns = []
    known = set()
    for lineno, (cid, goal, start, end) in _rows(campaign_data, CAMPAIGN_HEADER, "campaigns.csv"):
        if not cid:
            raise TraceParseError("campaigns.csv", lineno, "empty campaign id")
        campaigns.append(
            Campaign(
                cid,
                _int(goal, "campaigns.csv", lineno, "goal"),
                _int(start, "campaigns.csv", lineno, "start day"),
                _int(end, "campaigns.csv", lineno, "end day"),
            )
        )
        known.add(cid)

    report = ValidationReport()
    merged: dict[tuple[str, str], list[int]] = {}
    offline = 0
    for lineno, (donor, cid, amount, day, flag) in _rows(donation_data, DONATION_HEADER, "donations.csv"):
        if cid not in known:
            raise TraceParseError("donations.csv", lineno, f"unknown campaign id {cid!r}")
        if flag not in ("0", "1"):
            raise TraceParseError("donations.csv", lineno, f"offline flag must be 0 or 1, got {flag!r}")
        amt = _int(amount, "donations.csv", lineno, "amount")
        date = _int(day, "donations.csv", lineno, "day")
        if flag == "1":
            offline += 1
            continue
        key = (donor, cid)
        if key in merged:
            merged[key][0] += amt
            merged[key][1] = min(merged[key][1], date)
        else:
            merged[key] = [amt, date]
    contributions = [Contribution(d, c, amt, date) for (d, c), (amt, date) in merged.items()]
    instance = Instance(tuple(campaigns), tuple(contributions), provenance)
    if offline:
        report.notes["offline_excluded"] = offline
        report.add(INFO, "donations.csv", f"{offline} offline contribution(s) excluded")
    report.extend(validate_instance(instance))
    return instance, report


def serialize(instance: Instance) -> tuple[str, str]:
    """CSV text for (campaigns, donations); the inverse of :func:`parse_trace`."""
    cbuf, dbuf = io.StringIO(), io.StringIO()
    cw = csv.writer(cbuf, lineterminator="\n")
    cw.writerow(CAMPAIGN_HEADER)
    for c in instance.campaigns:
        cw.writerow((c.id, c.goal, c.start, c.end))
    dw = csv.writer(dbuf, lineterminator="\n")
    dw.writerow(DONATION_HEADER)
    for c in instance.contributions:
        dw.writerow((c.donor, c.campaign, c.amount, c.date, 0))
    return cbuf.getvalue(), dbuf.getvalue()


def filter_campaigns(instance: Instance, snapshot: int) -> tuple[Instance, ValidationReport]:
    """Drop campaigns still active at ``snapshot`` and campaigns with late donations."""
    report = ValidationReport()
    late: dict[str, int] = {}
    camps = instance.campaign_by_id
    for c in instance.contributions:
        camp = camps.get(c.campaign)
        if camp is not None and c.date > camp.end + LATE_DAYS:
            late[c.campaign] = max(late.get(c.campaign, c.date), c.date)
    keep = []
    for c in instance.campaigns:
        if c.end > snapshot:
            report.add(INFO, f"campaign {c.id}", f"removed: still active at snapshot day {snapshot}")
        elif c.id in late:
            report.add(INFO, f"campaign {c.id}", f"removed: live more than {LATE_DAYS} days after end (day {late[c.id]})")
        else:
            keep.append(c)
    kept = {c.id for c in keep}
    contribs = [c for c in instance.contributions if c.campaign in kept]
    report.notes["campaigns_removed"] = len(instance.campaigns) - len(keep)
    report.notes["contributions_removed"] = len(instance.contributions) - len(contribs)
    return instance.replace(campaigns=keep, contributions=contribs), report


@dataclass(frozen=True)
class SynthParams:
    """Targets for a synthetic trace; defaults reproduce the summary statistics of a
    mid-sized all-or-nothing platform (228 campaigns, 7935 donors).

    The donation-amount law is not given by the source data; amounts are drawn
    log-normal with mean ``mean_amount`` (cents) as a calibration convenience.
    """

    n_campaigns: int = 228
    n_donors: int = 7935
    repeat_fraction: float = 0.169
    mean_goal: int = 1_951_700
    goal_sigma: float = 1.0
    mean_life_days: float = 44.0
    life_sigma: float = 0.6
    mean_gap_days: float = 96.0
    mean_backed_per_repeat: float = 3.7
    mean_amount: int = 20_000
    amount_sigma: float = 1.0
    popularity_exponent: float = 0.0
    popularity_sigma: float = 0.5
    horizon_days: int = 821
    seed: int = 1

    def validate(self) -> None:
        if self.n_campaigns <= 0 or self.n_donors <= 0:
            raise ParameterError("campaign and donor counts must be positive")
        if not 0.0 <= self.repeat_fraction <= 1.0:
            raise ParameterError("repeat_fraction must lie in [0, 1]")
        if self.repeat_donors > 0 and self.n_campaigns < 2:
            raise ParameterError("repeat donors need at least two campaigns")
        if self.mean_backed_per_repeat < 2.0 and self.repeat_donors > 0:
            raise ParameterError("mean_backed_per_repeat must be at least 2")
        for name in ("mean_goal", "mean_amount", "mean_life_days", "mean_gap_days", "horizon_days"):
            if getattr(self, name) <= 0:
                raise ParameterError(f"{name} must be positive")
        for name in ("goal_sigma", "life_sigma", "amount_sigma", "popularity_sigma"):
            if getattr(self, name) < 0:
                raise ParameterError(f"{name} must be non-negative")

    @property
    def repeat_donors(self) -> int:
        return int(math.floor(self.repeat_fraction * self.n_donors + 0.5))

    def to_dict(self) -> dict:
        return asdict(self)


def _lognormal(rng: np.random.Generator, mean: float, sigma: float, size: int) -> np.ndarray:
    mu = math.log(mean) - sigma * sigma / 2.0
    return rng.lognormal(mu, sigma, size)


def generate_synthetic(params: SynthParams) -> Instance:
    """Draw a trace whose summary statistics track ``params``.

    Campaign starts are uniform over the horizon.  Repeat donors walk forward
    in time with exponential gaps between donations, each time backing a
    campaign live on that day; a walk stops early when nothing new is
    reachable.
    """
    params.validate()
    rng = np.random.default_rng(params.seed)
    m = params.n_campaigns
    width = max(4, len(str(m - 1)))
    ids = [f"c{k:0{width}d}" for k in range(m)]

    lives = np.maximum(1, np.rint(_lognormal(rng, params.mean_life_days, params.life_sigma, m))).astype(int)
    last_start = max(0, params.horizon_days - 1)
    starts = rng.integers(0, last_start + 1, size=m)
    goals_dollars = np.maximum(1, np.rint(_lognormal(rng, params.mean_goal / 100.0, params.goal_sigma, m))).astype(int)
    campaigns = [
        Campaign(ids[k], int(goals_dollars[k]) * 100, int(starts[k]), int(starts[k] + lives[k]))
        for k in range(m)
    ]
    popularity = (goals_dollars.astype(float) ** params.popularity_exponent) * _lognormal(
        rng, 1.0, params.popularity_sigma, m
    )
    weights = popularity / popularity.sum()

    n_rep = params.repeat_donors
    n_single = params.n_donors - n_rep
    dwidth = len(str(params.n_donors - 1))
    pairs: list[tuple[str, int, int]] = []  # (donor, campaign index, day)

    by_start = np.argsort(starts, kind="stable")
    ends = starts + lives
    for k in range(n_rep):
        donor = f"d{k:0{dwidth}d}"
        n_backed = 1 + int(rng.geometric(1.0 / (params.mean_backed_per_repeat - 1.0)))
        gaps = np.rint(rng.exponential(params.mean_gap_days, n_backed - 1)).astype(int)
        slack = max(0, params.horizon_days - 1 - int(gaps.sum()))
        target = int(rng.integers(0, slack + 1))
        backed: set[int] = set()
        for step in range(n_backed):
            if step:
                target = day + int(gaps[step - 1])
            live = [c for c in by_start if starts[c] <= target <= ends[c] and c not in backed]
            if not live:
                upcoming = [c for c in by_start if starts[c] > target and c not in backed]
                if not upcoming:
                    break
                target = int(starts[upcoming[0]])
                live = [c for c in upcoming if starts[c] == target]
            w = weights[live] / weights[live].sum()
            camp_idx = int(live[int(rng.choice(len(live), p=w))])
            day = target
            backed.add(camp_idx)
            pairs.append((donor, camp_idx, day))
    for k in range(n_single):
        donor = f"d{n_rep + k:0{dwidth}d}"
        c = int(rng.choice(m, p=weights))
        pairs.append((donor, c, int(rng.integers(starts[c], ends[c] + 1))))

    amounts = np.maximum(1, np.rint(_lognormal(rng, params.mean_amount, params.amount_sigma, len(pairs)))).astype(int)
    contributions = tuple(
        Contribution(donor, ids[c], int(a), day) for (donor, c, day), a in zip(pairs, amounts)
    )
    return Instance(tuple(campaigns), contributions, provenance=f"synthetic seed={params.seed}")


def realized_stats(instance: Instance) -> dict[str, float]:
    """The summary statistics the generator is calibrated against."""
    by_donor = instance.by_donor
    repeat = [d for d, cs in by_donor.items() if len(cs) >= 2]
    gaps = []
    for d in repeat:
        days = sorted(instance.dates[(d, c)] for c in by_donor[d])
        gaps.extend(b - a for a, b in zip(days, days[1:]))
    n_donors = len(by_donor)
    camps = instance.campaigns
    return {
        "campaigns": len(camps),
        "donors": n_donors,
        "repeat_donors": len(repeat),
        "repeat_fraction": len(repeat) / n_donors if n_donors else 0.0,
        "mean_backed_per_repeat": (sum(len(by_donor[d]) for d in repeat) / len(repeat)) if repeat else 0.0,
        "mean_goal": sum(c.goal for c in camps) / len(camps) if camps else 0.0,
        "mean_life_days": sum(c.span for c in camps) / len(camps) if camps else 0.0,
        "mean_gap_days": sum(gaps) / len(gaps) if gaps else 0.0,
    }


__all__ = [
    "CAMPAIGN_HEADER",
    "DONATION_HEADER",
    "ERROR",
    "ParameterError",
    "SynthParams",
    "TraceParseError",
    "filter_campaigns",
    "generate_synthetic",
    "parse_trace",
    "realized_stats",
    "serialize",
]
