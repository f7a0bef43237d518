"""Behavioral statistics over telemetry logs, census records, and surveys.

All aggregation runs at full precision (exact fractions); rounding to
one decimal, half-up, happens only at the display boundary. Every
operation is a deterministic function of its inputs, so report files
are byte-identical across reruns.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from decimal import Decimal, ROUND_HALF_UP
from fractions import Fraction
from math import comb
from pathlib import Path
from typing import Iterable, Sequence

from .crawler import CensusReport
from .telemetry import OPTOUT_KINDS, TelemetryEvent

MECHANISMS = ("optout_banner", "optout_menu", "optout_native")


def round1(value: Fraction | float) -> float:
    """Round to one decimal place, half-up (not banker's)."""
    if isinstance(value, Fraction):
        dec = Decimal(value.numerator) / Decimal(value.denominator)
    else:
        dec = Decimal(repr(value))
    return float(dec.quantize(Decimal("0.1"), rounding=ROUND_HALF_UP))


def pct(numerator: int, denominator: int) -> Fraction:
    return Fraction(numerator * 100, denominator)


@dataclass(frozen=True)
class UserSummary:
    """Per-user opt-out behavior with distinct-site semantics.

    A site counts as visited when it has at least one page_load; as a
    link site when any event there carries a valid or ambiguous link
    status; as an opt-out site when at least one opt-out event exists.
    Repeated opt-outs on one site count once.
    """

    user_id: str
    condition: str
    n_sites_visited: int
    n_link_sites: int
    n_optout_sites: int

    @property
    def optout_rate(self) -> float | None:
        if self.n_link_sites == 0:
            return None
        return self.n_optout_sites / self.n_link_sites

    @property
    def exact_rate(self) -> Fraction | None:
        if self.n_link_sites == 0:
            return None
        return Fraction(self.n_optout_sites, self.n_link_sites)


def summarize_users(events: Iterable[TelemetryEvent]) -> list[UserSummary]:
    """Group events by user and reduce to distinct-site counts.

    A user's condition is taken from their first event in arrival
    order. Opt-out events on sites that never logged a page_load are
    ignored, keeping n_optout_sites <= n_link_sites <= n_sites_visited.
    """
    order: list[str] = []
    condition: dict[str, str] = {}
    visited: dict[str, set[str]] = {}
    link_sites: dict[str, set[str]] = {}
    optout_sites: dict[str, set[str]] = {}

    for event in events:
        uid = event.user_id
        if uid not in condition:
            order.append(uid)
            condition[uid] = event.condition
            visited[uid] = set()
            link_sites[uid] = set()
            optout_sites[uid] = set()
        if event.event_kind == "page_load":
            visited[uid].add(event.site)
        if event.link_status in ("valid", "ambiguous"):
            link_sites[uid].add(event.site)
        if event.event_kind in OPTOUT_KINDS:
            optout_sites[uid].add(event.site)

    summaries = []
    for uid in order:
        seen = visited[uid]
        links = link_sites[uid] & seen
        optouts = optout_sites[uid] & links
        summaries.append(
            UserSummary(
                user_id=uid,
                condition=condition[uid],
                n_sites_visited=len(seen),
                n_link_sites=len(links),
                n_optout_sites=len(optouts),
            )
        )
    return summaries


def mean_optout_rate(summaries: Sequence[UserSummary]) -> Fraction | None:
    """Unweighted mean rate over users with at least one link site."""
    rates = [s.exact_rate for s in summaries if s.exact_rate is not None]
    if not rates:
        return None
    return sum(rates, Fraction(0)) / len(rates)


@dataclass(frozen=True)
class FrequencyHistogram:
    """Users bucketed by how many sites they opted out on."""

    bins: dict[int, int]  # n_optout_sites -> user count
    n_users: int
    fraction_with_optout: Fraction | None  # users with >=1 opt-out site

    @property
    def pct_with_optout(self) -> float | None:
        if self.fraction_with_optout is None:
            return None
        return round1(self.fraction_with_optout * 100)


def optout_frequency_histogram(summaries: Sequence[UserSummary]) -> FrequencyHistogram:
    """Histogram of users by opt-out site count (0, 1, 2, ...)."""
    bins: dict[int, int] = {}
    for s in summaries:
        bins[s.n_optout_sites] = bins.get(s.n_optout_sites, 0) + 1
    n = len(summaries)
    with_optout = sum(count for k, count in bins.items() if k >= 1)
    fraction = Fraction(with_optout, n) if n else None
    return FrequencyHistogram(bins=dict(sorted(bins.items())), n_users=n, fraction_with_optout=fraction)


@dataclass(frozen=True)
class MechanismBreakdown:
    """Shares of opt-outs by mechanism, over first opt-outs per (user, site)."""

    counts: dict[str, int]

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def share(self, mechanism: str) -> Fraction:
        return pct(self.counts.get(mechanism, 0), self.total)

    @property
    def shares(self) -> dict[str, float]:
        return {m: round1(self.share(m)) for m in MECHANISMS}


def mechanism_breakdown(events: Iterable[TelemetryEvent]) -> MechanismBreakdown:
    """Attribute each (user, site) opt-out to its first opt-out event.

    First means earliest timestamp, with arrival order breaking ties.
    Raises ValueError when the log contains no opt-out events.
    """
    first: dict[tuple[str, str], TelemetryEvent] = {}
    for event in events:
        if event.event_kind not in OPTOUT_KINDS:
            continue
        key = (event.user_id, event.site)
        if key not in first or event.ts < first[key].ts:
            first[key] = event
    if not first:
        raise ValueError("no opt-outs to break down")
    counts = {m: 0 for m in MECHANISMS}
    for event in first.values():
        counts[event.event_kind] += 1
    return MechanismBreakdown(counts=counts)


def fisher_exact(a: int, b: int, c: int, d: int) -> float:
    """Two-sided Fisher's exact test on the 2x2 table [[a, b], [c, d]].

    Sums hypergeometric probabilities of every table with the same
    margins whose probability does not exceed that of the observed
    table. Probabilities share the denominator C(N, n), so inclusion is
    decided by exact integer comparison of the numerators; the p-value
    is an exact rational converted to float at the end.
    """
    if min(a, b, c, d) < 0:
        raise ValueError("counts must be non-negative")
    if a + b + c + d == 0:
        raise ValueError("table has no observations")
    r1, r2 = a + b, c + d
    n = a + c
    lo = max(0, n - r2)
    hi = min(r1, n)
    observed = comb(r1, a) * comb(r2, n - a)
    total = 0
    included = 0
    for x in range(lo, hi + 1):
        weight = comb(r1, x) * comb(r2, n - x)
        total += weight
        if weight <= observed:
            included += weight
    return float(Fraction(included, total))


@dataclass(frozen=True)
class ConditionComparison:
    """User-level opted-out-at-least-once table with an exact p-value."""

    n_users: dict[str, int]
    n_opted_out: dict[str, int]
    p_value: float


def compare_conditions(summaries: Sequence[UserSummary]) -> ConditionComparison:
    """Fisher's exact test of opting out at least once, by condition."""
    n_users = {"observational": 0, "coa": 0}
    n_opted = {"observational": 0, "coa": 0}
    for s in summaries:
        n_users[s.condition] += 1
        if s.n_optout_sites >= 1:
            n_opted[s.condition] += 1
    for cond, count in n_users.items():
        if count == 0:
            raise ValueError(f"missing condition: {cond}")
    a = n_opted["observational"]
    b = n_users["observational"] - a
    c = n_opted["coa"]
    d = n_users["coa"] - c
    return ConditionComparison(n_users=n_users, n_opted_out=n_opted, p_value=fisher_exact(a, b, c, d))


def visited_link_fraction(events: Iterable[TelemetryEvent], condition: str | None = None) -> Fraction | None:
    """Fraction of distinct visited sites that carried an opt-out link.

    Site-level aggregation across users: each digest counts once, and a
    site is link-bearing when any page_load there saw a link.
    """
    visited: set[str] = set()
    linked: set[str] = set()
    for event in events:
        if condition is not None and event.condition != condition:
            continue
        if event.event_kind != "page_load":
            continue
        visited.add(event.site)
        if event.link_status in ("valid", "ambiguous"):
            linked.add(event.site)
    if not visited:
        return None
    return Fraction(len(linked & visited), len(visited))


@dataclass(frozen=True)
class PerceivedVsActual:
    """Survey-perceived sell rate against measured link prevalence."""

    perceived_mean: float | None
    census_rows: tuple[tuple[str, float], ...]  # (bucket label, valid+ambiguous pct)
    telemetry_link_pct: float | None


def perceived_vs_actual(
    perceived_mean: Fraction | float | None,
    census: CensusReport | None,
    telemetry_link_fraction: Fraction | None,
) -> PerceivedVsActual:
    """Assemble the perception-versus-reality comparison table."""
    census_rows: list[tuple[str, float]] = []
    if census is not None:
        for bucket in census.buckets:
            if bucket.n_sites == 0 or bucket.pct_valid is None or bucket.pct_ambiguous is None:
                continue
            census_rows.append((bucket.label, round1(bucket.exact_valid + bucket.exact_ambiguous)))
    return PerceivedVsActual(
        perceived_mean=round1(perceived_mean) if perceived_mean is not None else None,
        census_rows=tuple(census_rows),
        telemetry_link_pct=(
            round1(telemetry_link_fraction * 100) if telemetry_link_fraction is not None else None
        ),
    )
