"""Command-line entry points: scan, crawl, census, serve, report."""

from __future__ import annotations

import sys
from pathlib import Path

import click

from .crawler import (
    CrawlConfig,
    bucket_stats,
    crawl as run_crawl,
    load_domain_list,
    read_records,
)
from .detection import (
    EncodingError,
    LinkClassification,
    PhraseSet,
    decode_document,
    load_phrase_file,
    scan_document,
)
from .report import render_report
from .survey import load_survey_csv, summarize_survey
from .telemetry import EventStore

EXIT_VALID = 0
EXIT_AMBIGUOUS = 2
EXIT_NONE = 3


def _phrases(path: str | None) -> PhraseSet:
    return load_phrase_file(path) if path else PhraseSet.default()


@click.group()
def main() -> None:
    """Measure and classify CCPA do-not-sell links."""


@main.command()
@click.argument("source")
@click.option("--phrases", "phrases_path", type=click.Path(exists=True), default=None,
              help="Phrase config file ([valid]/[ambiguous] sections).")
def scan(source: str, phrases_path: str | None) -> None:
    """Scan a local HTML file or an http(s) URL for opt-out links.

    Exit status: 0 valid, 2 ambiguous, 3 none.
    """
    phrases = _phrases(phrases_path)
    if source.startswith(("http://", "https://")):
        import requests

        response = requests.get(source, timeout=30)
        html = response.text
    else:
        try:
            html = decode_document(Path(source).read_bytes())
        except EncodingError as exc:
            raise click.ClickException(str(exc))
    result = scan_document(html, phrases)
    click.echo(f"page_verdict\t{result.page_verdict.to_wire()}")
    for candidate in result.candidates:
        click.echo(
            f"{candidate.classification.to_wire()}\t{candidate.element_kind}\t"
            f"{candidate.text}\t{candidate.dom_path}"
        )
    sys.exit(
        {
            LinkClassification.VALID: EXIT_VALID,
            LinkClassification.AMBIGUOUS: EXIT_AMBIGUOUS,
            LinkClassification.NONE: EXIT_NONE,
        }[result.page_verdict]
    )


@main.command(name="crawl")
@click.option("--list", "list_path", required=True, type=click.Path(exists=True),
              help="CSV of rank,domain lines.")
@click.option("--out", "out_path", required=True, type=click.Path(),
              help="JSON-lines record file (appended; completed domains are skipped).")
@click.option("--phrases", "phrases_path", type=click.Path(exists=True), default=None)
@click.option("--concurrency", default=8, show_default=True)
@click.option("--timeout", default=20.0, show_default=True, help="Per-request timeout, seconds.")
@click.option("--origin-override", default=None,
              help="Route every fetch to OVERRIDE/<domain> (fixture server).")
def crawl_cmd(list_path: str, out_path: str, phrases_path: str | None,
              concurrency: int, timeout: float, origin_override: str | None) -> None:
    """Fetch and classify each domain's homepage into a record file."""
    domains = load_domain_list(list_path)
    config = CrawlConfig(concurrency=concurrency, timeout=timeout, origin_override=origin_override)
    count = 0
    for record in run_crawl(domains, config, _phrases(phrases_path), out_path):
        count += 1
        click.echo(
            f"{record.rank}\t{record.domain}\t{record.outcome.status}\t{record.verdict.to_wire()}"
        )
    click.echo(f"crawled {count} domains -> {out_path}", err=True)


@main.command()
@click.option("--records", "records_path", required=True, type=click.Path(exists=True))
@click.option("--buckets", default="500,1000,5000", show_default=True,
              help="Comma-separated Top-N bucket edges.")
def census(records_path: str, buckets: str) -> None:
    """Summarize a crawl record file into Top-N buckets."""
    records = read_records(records_path)
    edges = [int(part) for part in buckets.split(",") if part.strip()]
    report = bucket_stats(records, edges)
    click.echo(report.to_text())
    click.echo("")
    click.echo("label,rank_from,rank_to,n_sites,pct_valid,pct_ambiguous,pct_none")
    for row in report.to_rows():
        fmt = lambda v: "" if v is None else f"{v:.1f}"
        click.echo(
            f"{row['label']},{row['rank_from']},{row['rank_to']},{row['n_sites']},"
            f"{fmt(row['pct_valid'])},{fmt(row['pct_ambiguous'])},{fmt(row['pct_none'])}"
        )


@main.command()
@click.option("--port", default=8080, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--store", "store_path", required=True, type=click.Path())
def serve(port: int, host: str, store_path: str) -> None:
    """Run the telemetry ingestion service."""
    from .service import run_server

    run_server(store_path, host=host, port=port)


@main.command()
@click.option("--store", "store_path", required=True, type=click.Path(exists=True))
@click.option("--census", "census_path", type=click.Path(exists=True), default=None)
@click.option("--survey-pre", "survey_pre_path", type=click.Path(exists=True), default=None)
@click.option("--survey-post", "survey_post_path", type=click.Path(exists=True), default=None)
@click.option("--buckets", default="500,5000", show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path())
def report(store_path: str, census_path: str | None, survey_pre_path: str | None,
           survey_post_path: str | None, buckets: str, out_dir: str) -> None:
    """Emit the full statistics report (CSV tables plus summary)."""
    store = EventStore(store_path)
    census_report = None
    if census_path:
        edges = [int(part) for part in buckets.split(",") if part.strip()]
        census_report = bucket_stats(read_records(census_path), edges)
    survey_pre = (
        summarize_survey(load_survey_csv(survey_pre_path), "pre") if survey_pre_path else None
    )
    survey_post = (
        summarize_survey(load_survey_csv(survey_post_path), "post") if survey_post_path else None
    )
    written = render_report(
        store.all_events(),
        out_dir,
        census=census_report,
        survey_pre=survey_pre,
        survey_post=survey_post,
    )
    for path in written:
        click.echo(str(path))


if __name__ == "__main__":
    main()
