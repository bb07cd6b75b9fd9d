"""Overlap sets of contributions and the temporal decomposition of an instance."""

from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass

from .domain import Instance


class PreconditionError(ValueError):
    pass


@dataclass(frozen=True)
class OverlapSet:
    donor: str
    anchor: str
    members: frozenset[str]


@dataclass(frozen=True)
class TemporalComponent:
    campaigns: tuple[str, ...]

    def __contains__(self, cid: str) -> bool:
        return cid in self.campaigns

    def __len__(self) -> int:
        return len(self.campaigns)


def _contribution_date(instance: Instance, donor: str, campaign: str) -> int:
    try:
        return instance.dates[(donor, campaign)]
    except KeyError:
        raise PreconditionError(f"donor {donor!r} has no contribution to {campaign!r}") from None


def agnostic_overlap(instance: Instance, donor: str, campaign: str) -> OverlapSet:
    """Campaigns still live at the donation date that started before the anchor ended."""
    d = _contribution_date(instance, donor, campaign)
    end_j = instance.campaign_by_id[campaign].end
    members = frozenset(x.id for x in instance.campaigns if x.end >= d and x.start <= end_j)
    return OverlapSet(donor, campaign, members)


def preserving_overlap(instance: Instance, donor: str, campaign: str) -> OverlapSet:
    """Like :func:`agnostic_overlap`, restricted to the donor's own contributions
    and keyed on the donor's contribution date rather than the campaign start."""
    d = _contribution_date(instance, donor, campaign)
    end_j = instance.campaign_by_id[campaign].end
    camps = instance.campaign_by_id
    members = frozenset(
        x
        for x in instance.by_donor[donor]
        if camps[x].end >= d and instance.dates[(donor, x)] <= end_j
    )
    return OverlapSet(donor, campaign, members)


class OverlapIndex:
    """Batch computation of agnostic overlap sets for every contribution.

    Campaigns are sorted by start so each query scans only those that started
    before the anchor's end.
    """

    def __init__(self, instance: Instance):
        self.instance = instance
        order = sorted(instance.campaigns, key=lambda c: (c.start, c.id))
        self._starts = [c.start for c in order]
        self._order = order
        self._cache: dict[tuple[int, int], frozenset[str]] = {}

    def members(self, date: int, anchor_end: int) -> frozenset[str]:
        key = (date, anchor_end)
        hit = self._cache.get(key)
        if hit is None:
            stop = bisect_left(self._starts, anchor_end + 1)
            hit = frozenset(c.id for c in self._order[:stop] if c.end >= date)
            self._cache[key] = hit
        return hit

    def agnostic(self, donor: str, campaign: str) -> frozenset[str]:
        d = _contribution_date(self.instance, donor, campaign)
        return self.members(d, self.instance.campaign_by_id[campaign].end)


def temporal_components(instance: Instance) -> list[TemporalComponent]:
    """Connected components of the interval-intersection graph (closed intervals)."""
    order = sorted(instance.campaigns, key=lambda c: (c.start, c.end, c.id))
    groups: list[list[str]] = []
    reach = None
    for c in order:
        if reach is None or c.start > reach:
            groups.append([c.id])
            reach = c.end
        else:
            groups[-1].append(c.id)
            reach = max(reach, c.end)
    return [TemporalComponent(tuple(sorted(g))) for g in groups]

