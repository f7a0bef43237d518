"""Builders for synthetic browsing traces and census records.

The golden cohort below is hand-enumerated: 33 coa users where
12 users opt out on 1 of 3 link sites (rate 1/3),
8 users opt out on 2 of 8 link sites (rate 1/4),
1 user opts out on 2 of 10 link sites (rate 1/5), and
12 users with 2 link sites never opt out.
Sum of rates = 12/3 + 8/4 + 1/5 = 31/5, so the cohort mean is
31/165 = 18.7878...% (displays as 18.8) and 21/33 = 63.63...% of users
(displays as 63.6) opted out at least once. The 30 opted (user, site)
pairs are assigned mechanisms 16 banner / 2 menu / 12 native, giving
shares 53.3 / 6.7 / 40.0 after rounding.
"""

from __future__ import annotations

import uuid
from datetime import datetime, timedelta, timezone

from ccpa_optout.telemetry import TelemetryEvent, hash_site, validate_event


def user_id(name: str) -> str:
    return str(uuid.uuid5(uuid.NAMESPACE_DNS, name))


class TraceBuilder:
    """Emits wire-format events with strictly increasing timestamps."""

    def __init__(self, start: datetime | None = None) -> None:
        self._t = start or datetime(2021, 7, 1, 0, 0, 0, tzinfo=timezone.utc)
        self.events: list[dict] = []
        self.hosts_seen: set[str] = set()

    def _ts(self) -> str:
        self._t += timedelta(seconds=1)
        return self._t.isoformat().replace("+00:00", "Z")

    def add(self, user: str, host: str, kind: str, link: str, cond: str) -> dict:
        self.hosts_seen.add(host)
        event = {
            "v": 1,
            "user_id": user_id(user),
            "site": hash_site(f"https://{host}/"),
            "link": link,
            "event": kind,
            "cond": cond,
            "ts": self._ts(),
        }
        self.events.append(event)
        return event

    def page_load(self, user: str, host: str, link: str = "valid", cond: str = "coa") -> dict:
        return self.add(user, host, "page_load", link, cond)

    def optout(self, user: str, host: str, mechanism: str, link: str = "valid",
               cond: str = "coa") -> dict:
        return self.add(user, host, mechanism, link, cond)

    def validated(self) -> list[TelemetryEvent]:
        return [validate_event(e) for e in self.events]


GOLDEN_GROUPS = (
    # (n_users, n_link_sites, n_optout_sites)
    (12, 3, 1),
    (8, 8, 2),
    (1, 10, 2),
    (12, 2, 0),
)
GOLDEN_MECHANISM_PLAN = ("optout_banner",) * 16 + ("optout_menu",) * 2 + ("optout_native",) * 12


def build_golden_coa_trace(tb: TraceBuilder | None = None) -> TraceBuilder:
    """The hand-enumerated coa cohort described in the module docstring."""
    tb = tb or TraceBuilder()
    mechanisms = iter(GOLDEN_MECHANISM_PLAN)
    user_index = 0
    for n_users, n_links, n_optouts in GOLDEN_GROUPS:
        for _ in range(n_users):
            user = f"coa-user-{user_index:02d}"
            user_index += 1
            # One linkless site per user so visited > link sites.
            tb.page_load(user, f"plain-{user}.fixture.test", link="none")
            for j in range(n_links):
                host = f"site-{j}-{user}.fixture.test"
                tb.page_load(user, host, link="valid")
                if j < n_optouts:
                    tb.optout(user, host, next(mechanisms), link="valid")
    return tb


def build_observational_trace(tb: TraceBuilder | None = None, n_users: int = 22) -> TraceBuilder:
    """Observational cohort: link sites seen, nothing opted out."""
    tb = tb or TraceBuilder()
    for i in range(n_users):
        user = f"obs-user-{i:02d}"
        tb.page_load(user, f"obs-plain-{i}.fixture.test", link="none", cond="observational")
        tb.page_load(user, f"obs-linked-{i}.fixture.test", link="valid", cond="observational")
    return tb


def build_pinned_comparison_trace() -> TraceBuilder:
    """Cohorts matching the published table: 22 observational users with
    no opt-outs versus 32 coa users of whom 20 opted out once."""
    tb = TraceBuilder()
    build_observational_trace(tb, n_users=22)
    for i in range(32):
        user = f"pinned-coa-{i:02d}"
        host = f"pinned-site-{i}.fixture.test"
        tb.page_load(user, host, link="valid")
        if i < 20:
            tb.optout(user, host, "optout_banner", link="valid")
    return tb
