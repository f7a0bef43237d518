"""Homepage census crawler for ranked domain lists.

Fetches each domain's homepage (https first, plain http as fallback),
scans the body for opt-out-of-sale links, and appends one record per
domain to a JSON-lines file. Records are flushed as they complete, so
an interrupted crawl loses at most in-flight work and a rerun skips
every domain already on disk. Politeness: bounded worker pool, at most
one in-flight request per host.
"""

from __future__ import annotations

import json
import socket
import threading
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from datetime import datetime, timezone
from decimal import Decimal, ROUND_HALF_UP
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import requests

from .detection import LinkClassification, PhraseSet, scan_document

DEFAULT_USER_AGENT = "ccpa-optout-census/0.1 (research crawler; one homepage fetch per site)"


@dataclass(frozen=True, order=True)
class RankedDomain:
    rank: int
    domain: str


class DomainListError(ValueError):
    """Raised for unparseable or duplicate-rank domain list lines."""


def load_domain_list(path: str | Path) -> list[RankedDomain]:
    """Parse a `rank,domain` CSV into RankedDomains sorted by rank."""
    out: list[RankedDomain] = []
    seen_ranks: set[int] = set()
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        rank_str, sep, domain = line.partition(",")
        domain = domain.strip().lower()
        if not sep or not domain:
            raise DomainListError(f"line {lineno}: expected 'rank,domain', got {line!r}")
        try:
            rank = int(rank_str)
        except ValueError:
            raise DomainListError(f"line {lineno}: bad rank {rank_str!r}") from None
        if rank <= 0:
            raise DomainListError(f"line {lineno}: rank must be positive")
        if rank in seen_ranks:
            raise DomainListError(f"line {lineno}: duplicate rank {rank}")
        seen_ranks.add(rank)
        out.append(RankedDomain(rank=rank, domain=domain))
    out.sort()
    return out


@dataclass
class CrawlConfig:
    concurrency: int = 8
    timeout: float = 20.0
    max_redirects: int = 5
    max_body_bytes: int = 5 * 1024 * 1024
    user_agent: str = DEFAULT_USER_AGENT
    # Routes every request to `{origin_override}/{domain}` instead of the
    # real host; lets tests stand in a local fixture server for the web.
    origin_override: str | None = None


@dataclass(frozen=True)
class FetchOutcome:
    status: str  # ok | timeout | dns_error | http_error | too_many_redirects
    http_code: int | None = None
    final_url: str | None = None
    body: bytes | None = None

    @property
    def body_bytes(self) -> int | None:
        return len(self.body) if self.body is not None else None


@dataclass(frozen=True)
class SiteRecord:
    rank: int
    domain: str
    outcome: FetchOutcome
    verdict: LinkClassification
    scanned_at: datetime

    def to_json_line(self) -> str:
        return json.dumps(
            {
                "rank": self.rank,
                "domain": self.domain,
                "status": self.outcome.status,
                "http_code": self.outcome.http_code,
                "verdict": self.verdict.to_wire(),
                "scanned_at": self.scanned_at.astimezone(timezone.utc)
                .isoformat()
                .replace("+00:00", "Z"),
            }
        )


def _is_dns_failure(exc: BaseException) -> bool:
    seen: set[int] = set()
    node: BaseException | None = exc
    while node is not None and id(node) not in seen:
        seen.add(id(node))
        if isinstance(node, socket.gaierror) or "NameResolution" in type(node).__name__:
            return True
        for arg in getattr(node, "args", ()):
            if isinstance(arg, BaseException) and _is_dns_failure(arg):
                return True
        node = node.__cause__ or node.__context__
    return False


def _read_capped(response: requests.Response, cap: int) -> bytes:
    chunks: list[bytes] = []
    size = 0
    for chunk in response.iter_content(chunk_size=65536):
        chunks.append(chunk)
        size += len(chunk)
        if size >= cap:
            break
    response.close()
    return b"".join(chunks)[:cap]


def _attempt(url: str, config: CrawlConfig) -> FetchOutcome:
    session = requests.Session()
    session.max_redirects = config.max_redirects
    try:
        try:
            response = session.get(
                url,
                timeout=config.timeout,
                stream=True,
                allow_redirects=True,
                headers={"User-Agent": config.user_agent},
            )
        except requests.Timeout:
            return FetchOutcome(status="timeout")
        except requests.TooManyRedirects:
            return FetchOutcome(status="too_many_redirects")
        except requests.RequestException as exc:
            if _is_dns_failure(exc):
                return FetchOutcome(status="dns_error")
            # Transport failure without an HTTP response (refused, reset,
            # TLS): http_error with no code, since a code needs a response.
            return FetchOutcome(status="http_error")

        if response.status_code >= 400:
            response.close()
            return FetchOutcome(
                status="http_error", http_code=response.status_code, final_url=response.url
            )
        try:
            body = _read_capped(response, config.max_body_bytes)
        except requests.Timeout:
            return FetchOutcome(status="timeout")
        except requests.RequestException:
            return FetchOutcome(
                status="http_error", http_code=response.status_code, final_url=response.url
            )
        return FetchOutcome(
            status="ok", http_code=response.status_code, final_url=response.url, body=body
        )
    finally:
        session.close()


def fetch_homepage(domain: RankedDomain, config: CrawlConfig) -> FetchOutcome:
    """Fetch one homepage; never raises for network conditions.

    Tries https first and falls back to plain http when no response at
    all came back. With origin_override set, a single request goes to
    `{override}/{domain}` instead.
    """
    if config.origin_override is not None:
        url = f"{config.origin_override.rstrip('/')}/{domain.domain}"
        return _attempt(url, config)
    outcome = _attempt(f"https://{domain.domain}/", config)
    if outcome.status in ("timeout", "dns_error") or (
        outcome.status == "http_error" and outcome.http_code is None
    ):
        fallback = _attempt(f"http://{domain.domain}/", config)
        # Keep the fallback outcome; it either succeeded or reflects the
        # same unreachable host.
        return fallback
    return outcome


def read_records(path: str | Path) -> list[SiteRecord]:
    """Load records from a JSON-lines file, skipping torn/invalid lines."""
    records, _ = _read_records_tolerant(path)
    return records


def _read_records_tolerant(path: str | Path) -> tuple[list[SiteRecord], bool]:
    path = Path(path)
    records: list[SiteRecord] = []
    saw_invalid = False
    if not path.exists():
        return records, saw_invalid
    with path.open("r", encoding="utf-8", errors="replace") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                record = SiteRecord(
                    rank=int(obj["rank"]),
                    domain=str(obj["domain"]),
                    outcome=FetchOutcome(
                        status=str(obj["status"]),
                        http_code=obj.get("http_code"),
                    ),
                    verdict=LinkClassification.from_wire(obj["verdict"]),
                    scanned_at=datetime.fromisoformat(
                        str(obj["scanned_at"]).replace("Z", "+00:00")
                    ),
                )
            except (ValueError, KeyError, TypeError):
                saw_invalid = True
                continue
            records.append(record)
    return records, saw_invalid


class _RecordSink:
    """Serialized line-per-record writer; one flush per record."""

    def __init__(self, path: Path) -> None:
        self._fh = path.open("a", encoding="utf-8")
        self._lock = threading.Lock()

    def write(self, record: SiteRecord) -> None:
        line = record.to_json_line() + "\n"
        with self._lock:
            self._fh.write(line)
            self._fh.flush()

    def close(self) -> None:
        with self._lock:
            self._fh.close()


class _HostLocks:
    """At most one in-flight request per host."""

    def __init__(self) -> None:
        self._locks: dict[str, threading.Lock] = {}
        self._guard = threading.Lock()

    def for_host(self, host: str) -> threading.Lock:
        with self._guard:
            if host not in self._locks:
                self._locks[host] = threading.Lock()
            return self._locks[host]


def crawl(
    domains: Sequence[RankedDomain],
    config: CrawlConfig,
    phrases: PhraseSet | None = None,
    out_path: str | Path | None = None,
) -> Iterator[SiteRecord]:
    """Fetch and scan every domain, yielding one SiteRecord each.

    With out_path set, each record is appended and flushed before it is
    yielded, and domains already recorded there are skipped, so a
    killed crawl resumes without duplicates.
    """
    if phrases is None:
        phrases = PhraseSet.default()

    done: set[tuple[int, str]] = set()
    sink: _RecordSink | None = None
    if out_path is not None:
        out_path = Path(out_path)
        out_path.parent.mkdir(parents=True, exist_ok=True)
        existing, saw_invalid = _read_records_tolerant(out_path)
        if saw_invalid:
            # Compact away torn lines from a crashed run before appending.
            tmp = out_path.with_suffix(out_path.suffix + ".compact")
            with tmp.open("w", encoding="utf-8") as fh:
                for record in existing:
                    fh.write(record.to_json_line() + "\n")
            tmp.replace(out_path)
        done = {(r.rank, r.domain) for r in existing}
        sink = _RecordSink(out_path)

    todo = [d for d in domains if (d.rank, d.domain) not in done]
    host_locks = _HostLocks()

    def work(domain: RankedDomain) -> SiteRecord:
        with host_locks.for_host(domain.domain):
            outcome = fetch_homepage(domain, config)
        verdict = LinkClassification.NONE
        if outcome.status == "ok" and outcome.body is not None:
            text = outcome.body.decode("utf-8", errors="replace")
            verdict = scan_document(text, phrases).page_verdict
        return SiteRecord(
            rank=domain.rank,
            domain=domain.domain,
            outcome=outcome,
            verdict=verdict,
            scanned_at=datetime.now(timezone.utc),
        )

    try:
        if not todo:
            return
        with ThreadPoolExecutor(max_workers=max(1, config.concurrency)) as pool:
            futures = [pool.submit(work, d) for d in todo]
            for future in as_completed(futures):
                record = future.result()
                if sink is not None:
                    sink.write(record)
                yield record
    finally:
        if sink is not None:
            sink.close()


@dataclass(frozen=True)
class CensusBucket:
    label: str
    rank_range: tuple[int, int]
    n_sites: int
    n_valid: int
    n_ambiguous: int
    n_none: int

    @property
    def exact_valid(self) -> Fraction | None:
        return Fraction(self.n_valid * 100, self.n_sites) if self.n_sites else None

    @property
    def exact_ambiguous(self) -> Fraction | None:
        return Fraction(self.n_ambiguous * 100, self.n_sites) if self.n_sites else None

    @property
    def exact_none(self) -> Fraction | None:
        return Fraction(self.n_none * 100, self.n_sites) if self.n_sites else None

    @property
    def pct_valid(self) -> float | None:
        return _round1(self.exact_valid)

    @property
    def pct_ambiguous(self) -> float | None:
        return _round1(self.exact_ambiguous)

    @property
    def pct_none(self) -> float | None:
        return _round1(self.exact_none)


def _round1(value: Fraction | None) -> float | None:
    if value is None:
        return None
    dec = Decimal(value.numerator) / Decimal(value.denominator)
    return float(dec.quantize(Decimal("0.1"), rounding=ROUND_HALF_UP))


@dataclass(frozen=True)
class CensusReport:
    buckets: tuple[CensusBucket, ...]

    def to_rows(self) -> list[dict]:
        rows = []
        for b in self.buckets:
            rows.append(
                {
                    "label": b.label,
                    "rank_from": b.rank_range[0],
                    "rank_to": b.rank_range[1],
                    "n_sites": b.n_sites,
                    "pct_valid": b.pct_valid,
                    "pct_ambiguous": b.pct_ambiguous,
                    "pct_none": b.pct_none,
                }
            )
        return rows

    def to_text(self) -> str:
        header = f"{'bucket':<12}{'sites':>8}{'valid %':>10}{'ambiguous %':>13}{'none %':>9}"
        lines = [header, "-" * len(header)]
        for b in self.buckets:
            fmt = lambda v: "-" if v is None else f"{v:.1f}"
            lines.append(
                f"{b.label:<12}{b.n_sites:>8}{fmt(b.pct_valid):>10}"
                f"{fmt(b.pct_ambiguous):>13}{fmt(b.pct_none):>9}"
            )
        return "\n".join(lines)


def bucket_stats(records: Sequence[SiteRecord], bucket_edges: Sequence[int]) -> CensusReport:
    """Cumulative Top-N buckets over all records, failures included.

    Each edge N yields the bucket of records with rank <= N; failed
    fetches carry verdict none and stay in the denominator.
    """
    if list(bucket_edges) != sorted(set(bucket_edges)) or any(e <= 0 for e in bucket_edges):
        raise ValueError("bucket edges must be strictly increasing positive ranks")
    buckets = []
    for edge in bucket_edges:
        in_range = [r for r in records if r.rank <= edge]
        n_valid = sum(1 for r in in_range if r.verdict is LinkClassification.VALID)
        n_ambiguous = sum(1 for r in in_range if r.verdict is LinkClassification.AMBIGUOUS)
        buckets.append(
            CensusBucket(
                label=f"Top {edge}",
                rank_range=(1, edge),
                n_sites=len(in_range),
                n_valid=n_valid,
                n_ambiguous=n_ambiguous,
                n_none=len(in_range) - n_valid - n_ambiguous,
            )
        )
    return CensusReport(buckets=tuple(buckets))
