"""Pseudonymous telemetry: event schema, validation, and durable storage.

Log records never carry raw URLs or hostnames. Sites are keyed by the
SHA-256 digest of the host; users by an opaque UUID generated at install
time. Events land in a single append-only JSON-lines file; per-user and
per-site indices are rebuilt on startup. Exact duplicates (same user,
site, event kind, and timestamp) are stored once, so at-least-once
clients can redeliver batches safely.
"""

from __future__ import annotations

import json
import os
import re
import threading
import uuid
from dataclasses import dataclass
from datetime import datetime, timezone
from hashlib import sha256
from pathlib import Path
from typing import Iterable, Iterator
from urllib.parse import urlsplit

_DIGEST_RE = re.compile(r"^[0-9a-f]{64}$")

LINK_STATUSES = ("valid", "ambiguous", "none")
EVENT_KINDS = (
    "page_load",
    "optout_native",
    "optout_banner",
    "optout_menu",
    "banner_closed",
    "banner_disabled",
)
OPTOUT_KINDS = ("optout_native", "optout_banner", "optout_menu")
COA_ONLY_KINDS = ("optout_banner", "optout_menu", "banner_closed", "banner_disabled")
CONDITIONS = ("observational", "coa")

SCHEMA_VERSION = 1

# Exact field names on the wire.
WIRE_FIELDS = ("v", "user_id", "site", "link", "event", "cond", "ts")


class ValidationError(ValueError):
    """A telemetry event violated the schema; ``field`` names the culprit."""

    def __init__(self, field: str, reason: str) -> None:
        super().__init__(f"{field}: {reason}")
        self.field = field
        self.reason = reason


def hash_site(url: str) -> str:
    """Digest the host of ``url``: lowercase, port stripped, SHA-256 hex.

    Same host gives the same digest regardless of scheme, path, or query.
    Raises ValidationError when no host component can be extracted.
    """
    try:
        host = urlsplit(url).hostname
    except ValueError:
        raise ValidationError("site", f"unparseable URL {url!r}") from None
    if not host:
        raise ValidationError("site", f"no host component in {url!r}")
    return sha256(host.encode("utf-8")).hexdigest()


def is_site_digest(value: str) -> bool:
    return bool(_DIGEST_RE.match(value))


def parse_rfc3339_utc(value: str) -> datetime:
    """Parse an RFC 3339 timestamp and require it to be UTC."""
    text = value[:-1] + "+00:00" if value.endswith(("Z", "z")) else value
    try:
        ts = datetime.fromisoformat(text)
    except ValueError:
        raise ValidationError("ts", f"not an RFC 3339 timestamp: {value!r}") from None
    if ts.tzinfo is None:
        raise ValidationError("ts", "timestamp must carry a UTC offset")
    if ts.utcoffset() != timezone.utc.utcoffset(None):
        raise ValidationError("ts", "timestamp must be UTC")
    return ts.astimezone(timezone.utc)


def format_rfc3339_utc(ts: datetime) -> str:
    return ts.astimezone(timezone.utc).isoformat().replace("+00:00", "Z")


@dataclass(frozen=True)
class TelemetryEvent:
    """One validated log record."""

    schema_version: int
    user_id: str
    site: str  # 64-char lowercase hex digest of the host
    link_status: str
    event_kind: str
    condition: str
    ts: datetime  # always UTC

    def to_wire(self) -> dict:
        return {
            "v": self.schema_version,
            "user_id": self.user_id,
            "site": self.site,
            "link": self.link_status,
            "event": self.event_kind,
            "cond": self.condition,
            "ts": format_rfc3339_utc(self.ts),
        }

    @property
    def dedup_key(self) -> tuple[str, str, str, str]:
        return (self.user_id, self.site, self.event_kind, format_rfc3339_utc(self.ts))


def validate_event(raw: dict) -> TelemetryEvent:
    """Validate one wire-format message into a TelemetryEvent.

    Fails on the first violated rule with the offending field named.
    Unknown extra fields are rejected.
    """
    if not isinstance(raw, dict):
        raise ValidationError("body", "event must be an object")
    for key in raw:
        if key not in WIRE_FIELDS:
            raise ValidationError(key, "unknown field")
    for key in WIRE_FIELDS:
        if key not in raw:
            raise ValidationError(key, "missing field")

    v = raw["v"]
    if not isinstance(v, int) or isinstance(v, bool) or v != SCHEMA_VERSION:
        raise ValidationError("v", f"unsupported schema version {v!r}")

    user_id = raw["user_id"]
    if not isinstance(user_id, str):
        raise ValidationError("user_id", "must be a string")
    try:
        uuid.UUID(user_id)
    except ValueError:
        raise ValidationError("user_id", "not a UUID-format identifier") from None

    site = raw["site"]
    if not isinstance(site, str) or not is_site_digest(site):
        raise ValidationError("site", "not a 64-character lowercase hex digest")

    link = raw["link"]
    if link not in LINK_STATUSES:
        raise ValidationError("link", f"not one of {LINK_STATUSES}")

    event = raw["event"]
    if event not in EVENT_KINDS:
        raise ValidationError("event", f"not one of {EVENT_KINDS}")

    cond = raw["cond"]
    if cond not in CONDITIONS:
        raise ValidationError("cond", f"not one of {CONDITIONS}")

    if not isinstance(raw["ts"], str):
        raise ValidationError("ts", "must be a string")
    ts = parse_rfc3339_utc(raw["ts"])

    if event in COA_ONLY_KINDS and cond != "coa":
        raise ValidationError("event", f"{event} requires condition coa")
    if event in OPTOUT_KINDS or event in COA_ONLY_KINDS:
        if link == "none":
            raise ValidationError("link", f"{event} requires a link status other than none")

    return TelemetryEvent(
        schema_version=v,
        user_id=user_id,
        site=site,
        link_status=link,
        event_kind=event,
        condition=cond,
        ts=ts,
    )


@dataclass(frozen=True)
class IngestAck:
    """Acknowledgement for one ingested batch."""

    accepted: int
    rejected: tuple[tuple[int, str], ...]


class StorageError(RuntimeError):
    """The event log could not be written; the batch should be retried."""


class EventStore:
    """Append-only event log with dedup and simple query access.

    A single lock serializes appends, so acknowledged order is total;
    queries snapshot under the same lock and therefore see every batch
    acknowledged before they started.
    """

    def __init__(self, path: str | Path) -> None:
        self.path = Path(path)
        self._lock = threading.Lock()
        self._events: list[TelemetryEvent] = []
        self._seen: set[tuple[str, str, str, str]] = set()
        self._by_user: dict[str, list[int]] = {}
        self._by_site: dict[str, list[int]] = {}
        self.duplicates_suppressed = 0
        self._load()

    def _load(self) -> None:
        if not self.path.exists():
            self.path.parent.mkdir(parents=True, exist_ok=True)
            return
        with self.path.open("rb") as fh:
            for line in fh:
                if not line.endswith(b"\n"):
                    break  # torn trailing write from a crash; drop it
                try:
                    event = validate_event(json.loads(line))
                except (ValueError, ValidationError):
                    continue
                if event.dedup_key in self._seen:
                    continue
                self._index(event)

    def _index(self, event: TelemetryEvent) -> None:
        idx = len(self._events)
        self._events.append(event)
        self._seen.add(event.dedup_key)
        self._by_user.setdefault(event.user_id, []).append(idx)
        self._by_site.setdefault(event.site, []).append(idx)

    def __len__(self) -> int:
        with self._lock:
            return len(self._events)

    def ingest(self, batch: Iterable[dict]) -> IngestAck:
        """Validate and durably append a batch of raw wire events.

        Invalid events are reported by index and do not block the rest.
        Valid events duplicating an already-stored event count as
        accepted but are not stored again. Raises StorageError (and
        stores nothing from the batch) when the log cannot be written.
        """
        accepted: list[TelemetryEvent] = []
        rejected: list[tuple[int, str]] = []
        for i, raw in enumerate(batch):
            try:
                accepted.append(validate_event(raw))
            except ValidationError as exc:
                rejected.append((i, str(exc)))

        with self._lock:
            fresh: list[TelemetryEvent] = []
            keys_in_batch: set[tuple[str, str, str, str]] = set()
            for event in accepted:
                key = event.dedup_key
                if key in self._seen or key in keys_in_batch:
                    self.duplicates_suppressed += 1
                    continue
                keys_in_batch.add(key)
                fresh.append(event)
            if fresh:
                try:
                    with self.path.open("ab") as fh:
                        for event in fresh:
                            fh.write(json.dumps(event.to_wire()).encode("utf-8") + b"\n")
                        fh.flush()
                        os.fsync(fh.fileno())
                except OSError as exc:
                    raise StorageError(f"cannot append to event log: {exc}") from exc
                for event in fresh:
                    self._index(event)
        return IngestAck(accepted=len(accepted), rejected=tuple(rejected))

    def query(
        self,
        user_id: str | None = None,
        condition: str | None = None,
        event_kinds: Iterable[str] | None = None,
        time_range: tuple[datetime | None, datetime | None] | None = None,
    ) -> list[TelemetryEvent]:
        """Return events matching every supplied predicate, in arrival order.

        ``time_range`` is a closed interval; either bound may be None.
        An empty filter returns everything.
        """
        kinds = frozenset(event_kinds) if event_kinds is not None else None
        start, end = time_range if time_range is not None else (None, None)
        with self._lock:
            snapshot = list(self._events)
        out = []
        for event in snapshot:
            if user_id is not None and event.user_id != user_id:
                continue
            if condition is not None and event.condition != condition:
                continue
            if kinds is not None and event.event_kind not in kinds:
                continue
            if start is not None and event.ts < start:
                continue
            if end is not None and event.ts > end:
                continue
            out.append(event)
        return out

    def all_events(self) -> list[TelemetryEvent]:
        with self._lock:
            return list(self._events)
