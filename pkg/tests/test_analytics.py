"""Tests for user summaries, mechanism shares, and the exact test."""

from __future__ import annotations

import random
from fractions import Fraction
from math import factorial

import pytest
from hypothesis import given, settings, strategies as st

from ccpa_optout.analytics import (
    compare_conditions,
    fisher_exact,
    mean_optout_rate,
    mechanism_breakdown,
    optout_frequency_histogram,
    perceived_vs_actual,
    round1,
    summarize_users,
    visited_link_fraction,
)
from ccpa_optout.crawler import bucket_stats

from trace import TraceBuilder, build_golden_coa_trace, build_pinned_comparison_trace
from test_crawler import make_records


def fisher_oracle(a: int, b: int, c: int, d: int) -> Fraction:
    """Brute-force hypergeometric enumeration, exact rational arithmetic."""

    def choose(n: int, k: int) -> int:
        if k < 0 or k > n:
            return 0
        return factorial(n) // (factorial(k) * factorial(n - k))

    r1, r2, n = a + b, c + d, a + c
    total_tables = choose(r1 + r2, n)
    observed = Fraction(choose(r1, a) * choose(r2, n - a), total_tables)
    p = Fraction(0)
    for x in range(n + 1):
        prob = Fraction(choose(r1, x) * choose(r2, n - x), total_tables)
        if prob > 0 and prob <= observed:
            p += prob
    return p


class TestFisherExact:
    def test_symmetric_table(self):
        assert fisher_exact(1, 1, 1, 1) == 1.0

    def test_single_column(self):
        assert fisher_exact(0, 5, 0, 5) == 1.0

    def test_published_cohort_table(self):
        p = fisher_exact(0, 22, 20, 12)
        assert p < 1e-3
        oracle = float(fisher_oracle(0, 22, 20, 12))
        assert abs(p - oracle) <= 1e-12 * max(p, oracle)

    def test_published_cohort_enumerates_21_tables(self):
        # margins r1=22, r2=32, n=20: x ranges over 0..20
        a, b, c, d = 0, 22, 20, 12
        lo = max(0, (a + c) - (c + d))
        hi = min(a + b, a + c)
        assert hi - lo + 1 == 21

    def test_all_zero_rejected(self):
        with pytest.raises(ValueError):
            fisher_exact(0, 0, 0, 0)

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            fisher_exact(-1, 1, 1, 1)

    @given(
        st.integers(0, 25), st.integers(0, 25), st.integers(0, 25), st.integers(0, 25)
    )
    @settings(max_examples=200, deadline=None)
    def test_matches_oracle_and_in_range(self, a, b, c, d):
        if a + b + c + d == 0:
            return
        p = fisher_exact(a, b, c, d)
        assert 0.0 < p <= 1.0
        oracle = float(fisher_oracle(a, b, c, d))
        assert abs(p - oracle) <= 1e-12 * max(p, oracle)


class TestSummarizeUsers:
    def test_hand_enumerated_rate(self):
        tb = TraceBuilder()
        for j in range(16):
            tb.page_load("u1", f"link-{j}.fixture.test", link="valid")
        for j in range(3):
            tb.optout("u1", f"link-{j}.fixture.test", "optout_banner")
        (summary,) = summarize_users(tb.validated())
        assert summary.n_sites_visited == 16
        assert summary.n_link_sites == 16
        assert summary.n_optout_sites == 3
        assert summary.optout_rate == pytest.approx(0.1875)

    def test_zero_link_sites_rate_undefined(self):
        tb = TraceBuilder()
        tb.page_load("u1", "plain.fixture.test", link="none")
        (summary,) = summarize_users(tb.validated())
        assert summary.n_link_sites == 0
        assert summary.optout_rate is None

    def test_repeat_optouts_count_once(self):
        tb = TraceBuilder()
        tb.page_load("u1", "s.fixture.test", link="valid")
        tb.optout("u1", "s.fixture.test", "optout_banner")
        tb.optout("u1", "s.fixture.test", "optout_native")
        (summary,) = summarize_users(tb.validated())
        assert summary.n_optout_sites == 1

    def test_repeat_page_loads_distinct_sites(self):
        tb = TraceBuilder()
        for _ in range(5):
            tb.page_load("u1", "same.fixture.test", link="valid")
        (summary,) = summarize_users(tb.validated())
        assert summary.n_sites_visited == 1

    def test_dedup_idempotence(self):
        tb = TraceBuilder()
        tb.page_load("u1", "a.fixture.test", link="valid")
        tb.optout("u1", "a.fixture.test", "optout_banner")
        base = summarize_users(tb.validated())
        tb.optout("u1", "a.fixture.test", "optout_banner")  # duplicate, later ts
        tb.optout("u1", "a.fixture.test", "optout_menu")
        assert summarize_users(tb.validated()) == base

    def test_empty_input(self):
        assert summarize_users([]) == []

    def test_counts_nested(self):
        for summary in summarize_users(build_golden_coa_trace().validated()):
            assert summary.n_optout_sites <= summary.n_link_sites <= summary.n_sites_visited

    def test_golden_cohort_mean(self):
        summaries = summarize_users(build_golden_coa_trace().validated())
        assert len(summaries) == 33
        mean = mean_optout_rate(summaries)
        assert mean == Fraction(31, 165)
        assert round1(mean * 100) == 18.8

    def test_mean_between_min_and_max(self):
        summaries = summarize_users(build_golden_coa_trace().validated())
        rates = [s.exact_rate for s in summaries if s.exact_rate is not None]
        mean = mean_optout_rate(summaries)
        assert min(rates) <= mean <= max(rates)


class TestHistogram:
    def test_golden_fraction(self):
        summaries = summarize_users(build_golden_coa_trace().validated())
        histogram = optout_frequency_histogram(summaries)
        assert histogram.n_users == 33
        assert sum(histogram.bins.values()) == 33
        assert histogram.pct_with_optout == 63.6

    def test_all_zero_cohort(self):
        tb = TraceBuilder()
        tb.page_load("u1", "a.fixture.test", link="valid")
        tb.page_load("u2", "b.fixture.test", link="valid")
        histogram = optout_frequency_histogram(summarize_users(tb.validated()))
        assert histogram.bins == {0: 2}
        assert histogram.pct_with_optout == 0.0

    def test_small_cohort_bins(self):
        tb = TraceBuilder()
        plan = {"u0": 0, "u1": 1, "u2": 1, "u3": 2}
        for user, n_opt in plan.items():
            for j in range(2):
                tb.page_load(user, f"{user}-{j}.fixture.test", link="valid")
            for j in range(n_opt):
                tb.optout(user, f"{user}-{j}.fixture.test", "optout_banner")
        histogram = optout_frequency_histogram(summarize_users(tb.validated()))
        assert histogram.bins == {0: 1, 1: 2, 2: 1}


class TestMechanismBreakdown:
    def test_paper_shares(self):
        tb = TraceBuilder()
        plan = ("optout_banner",) * 8 + ("optout_menu",) * 1 + ("optout_native",) * 6
        for i, mechanism in enumerate(plan):
            host = f"m{i}.fixture.test"
            tb.page_load("u1", host, link="valid")
            tb.optout("u1", host, mechanism)
        breakdown = mechanism_breakdown(tb.validated())
        assert breakdown.shares == {
            "optout_banner": 53.3,
            "optout_menu": 6.7,
            "optout_native": 40.0,
        }

    def test_all_banner(self):
        tb = TraceBuilder()
        for i in range(4):
            host = f"b{i}.fixture.test"
            tb.page_load("u1", host, link="valid")
            tb.optout("u1", host, "optout_banner")
        assert mechanism_breakdown(tb.validated()).shares == {
            "optout_banner": 100.0,
            "optout_menu": 0.0,
            "optout_native": 0.0,
        }

    def test_first_event_attribution(self):
        tb = TraceBuilder()
        tb.page_load("u1", "s.fixture.test", link="valid")
        tb.optout("u1", "s.fixture.test", "optout_banner")
        tb.optout("u1", "s.fixture.test", "optout_native")
        breakdown = mechanism_breakdown(tb.validated())
        assert breakdown.counts == {"optout_banner": 1, "optout_menu": 0, "optout_native": 0}

    def test_no_optouts_is_error(self):
        tb = TraceBuilder()
        tb.page_load("u1", "s.fixture.test", link="valid")
        with pytest.raises(ValueError, match="no opt-outs"):
            mechanism_breakdown(tb.validated())

    def test_shuffle_invariance(self):
        tb = build_golden_coa_trace()
        events = tb.validated()
        expected = mechanism_breakdown(events).counts
        rng = random.Random(7)
        for _ in range(5):
            shuffled = events[:]
            rng.shuffle(shuffled)
            assert mechanism_breakdown(shuffled).counts == expected

    def test_shares_sum_to_100(self):
        breakdown = mechanism_breakdown(build_golden_coa_trace().validated())
        assert abs(sum(breakdown.shares.values()) - 100.0) <= 0.05
        assert sum(breakdown.share(m) for m in breakdown.counts) == 100


class TestCompareConditions:
    def test_pinned_cohorts_significant(self):
        summaries = summarize_users(build_pinned_comparison_trace().validated())
        result = compare_conditions(summaries)
        assert result.n_users == {"observational": 22, "coa": 32}
        assert result.n_opted_out == {"observational": 0, "coa": 20}
        assert result.p_value < 1e-3
        oracle = float(fisher_oracle(0, 22, 20, 12))
        assert abs(result.p_value - oracle) <= 1e-12 * oracle

    def test_identical_behavior_p_one(self):
        tb = TraceBuilder()
        for cond, prefix in (("observational", "o"), ("coa", "c")):
            for i in range(5):
                user = f"{prefix}{i}"
                host = f"{prefix}{i}.fixture.test"
                tb.page_load(user, host, link="valid", cond=cond)
                if i == 0:
                    kind = "optout_native" if cond == "observational" else "optout_banner"
                    tb.optout(user, host, kind, cond=cond)
        result = compare_conditions(summarize_users(tb.validated()))
        assert result.p_value == 1.0

    def test_missing_condition_is_error(self):
        tb = TraceBuilder()
        tb.page_load("u1", "s.fixture.test", link="valid")
        with pytest.raises(ValueError, match="observational"):
            compare_conditions(summarize_users(tb.validated()))


class TestPerceivedVsActual:
    def test_paper_rows(self):
        records = make_records(5000, n_valid=1085, n_ambiguous=135)
        census = bucket_stats(records, [5000])
        table = perceived_vs_actual(Fraction(662, 10), census, Fraction(243, 1000))
        assert table.perceived_mean == 66.2
        assert table.census_rows == (("Top 5000", 24.4),)
        assert table.telemetry_link_pct == 24.3

    def test_empty_census(self):
        table = perceived_vs_actual(Fraction(662, 10), None, None)
        assert table.census_rows == ()
        assert table.telemetry_link_pct is None

    def test_visited_link_fraction(self):
        tb = TraceBuilder()
        tb.page_load("u1", "linked.fixture.test", link="valid")
        tb.page_load("u1", "plain-a.fixture.test", link="none")
        tb.page_load("u2", "plain-b.fixture.test", link="none")
        tb.page_load("u2", "linked.fixture.test", link="valid")
        assert visited_link_fraction(tb.validated()) == Fraction(1, 3)

    def test_visited_link_fraction_empty(self):
        assert visited_link_fraction([]) is None
