"""Toolkit for measuring CCPA do-not-sell links and opt-out behavior."""

from .detection import (
    LinkCandidate,
    LinkClassification,
    PhraseSet,
    ScanResult,
    classify_phrase,
    load_phrase_file,
    normalize_text,
    scan_document,
)
from .crawler import (
    CensusReport,
    CrawlConfig,
    FetchOutcome,
    RankedDomain,
    SiteRecord,
    bucket_stats,
    crawl,
    fetch_homepage,
    load_domain_list,
    read_records,
)
from .telemetry import (
    EventStore,
    TelemetryEvent,
    ValidationError,
    hash_site,
    validate_event,
)
from .analytics import (
    compare_conditions,
    fisher_exact,
    mechanism_breakdown,
    optout_frequency_histogram,
    perceived_vs_actual,
    summarize_users,
)
from .survey import summarize_survey
from .report import render_report

__version__ = "0.1.0"
