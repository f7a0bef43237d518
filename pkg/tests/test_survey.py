"""Survey ingestion and Likert summary tests."""

from __future__ import annotations

import csv
from fractions import Fraction
from pathlib import Path

import pytest

from ccpa_optout.analytics import round1
from ccpa_optout.survey import (
    EXPECTED_HEADER,
    SurveyFormatError,
    load_survey_csv,
    summarize_survey,
)


def write_csv(path: Path, rows: list[dict[str, str]]) -> Path:
    with path.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=EXPECTED_HEADER)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: row.get(k, "") for k in EXPECTED_HEADER})
    return path


def respondent(i: int, condition: str = "coa", **answers: str) -> dict[str, str]:
    row = {"respondent_id": f"r{i:03d}", "condition": condition}
    row.update(answers)
    return row


def difficulty_rows(condition: str, n_difficult: int, n_easy: int) -> list[dict[str, str]]:
    rows = []
    for i in range(n_difficult + n_easy):
        answer = "Somewhat difficult" if i < n_difficult else "Somewhat easy"
        rows.append(
            respondent(i, condition=condition, Q5="Sometimes", Q6=answer)
        )
    return rows


class TestLoadCsv:
    def test_header_enforced(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("id,Q1\n1,50\n")
        with pytest.raises(SurveyFormatError):
            load_survey_csv(bad)

    def test_round_trip(self, tmp_path):
        rows = [respondent(1, Q1="50", Q2="Neutral")]
        loaded = load_survey_csv(write_csv(tmp_path / "s.csv", rows))
        assert loaded[0]["Q1"] == "50"
        assert loaded[0]["condition"] == "coa"


class TestValidation:
    def test_unknown_option_rejected(self, tmp_path):
        rows = [respondent(1, Q2="Kinda fine")]
        summary = summarize_survey(load_survey_csv(write_csv(tmp_path / "s.csv", rows)), "pre")
        assert summary.n_respondents == 0
        assert summary.rejected[0][1].startswith("Q2")

    def test_skip_logic_violation_rejected(self, tmp_path):
        rows = [respondent(1, Q5="Never Have", Q6="Somewhat easy")]
        summary = summarize_survey(load_survey_csv(write_csv(tmp_path / "s.csv", rows)), "pre")
        assert summary.n_respondents == 0
        assert "Never Have" in summary.rejected[0][1]

    def test_q1_range(self, tmp_path):
        rows = [respondent(1, Q1="150"), respondent(2, Q1="abc"), respondent(3, Q1="100")]
        summary = summarize_survey(load_survey_csv(write_csv(tmp_path / "s.csv", rows)), "pre")
        assert summary.n_respondents == 1
        assert len(summary.rejected) == 2

    def test_multi_select_race(self, tmp_path):
        rows = [respondent(1, Q10="White;Asian"), respondent(2, Q10="White;Martian")]
        summary = summarize_survey(load_survey_csv(write_csv(tmp_path / "s.csv", rows)), "pre")
        assert summary.n_respondents == 1
        assert summary.rejected[0][1].startswith("Q10")

    def test_never_have_without_followups_ok(self, tmp_path):
        rows = [respondent(1, Q5="Never Have")]
        summary = summarize_survey(load_survey_csv(write_csv(tmp_path / "s.csv", rows)), "pre")
        assert summary.n_respondents == 1

    def test_bad_wave(self):
        with pytest.raises(ValueError):
            summarize_survey([], "mid")


class TestHeadlines:
    def test_difficulty_split_by_condition(self, tmp_path):
        # 55% of 20 coa respondents report difficulty; 72% of 25 observational.
        rows = difficulty_rows("coa", 11, 9) + difficulty_rows("observational", 18, 7)
        summary = summarize_survey(load_survey_csv(write_csv(tmp_path / "s.csv", rows)), "post")
        coa_q6 = next(q for q in summary.by_condition["coa"] if q.question == "Q6")
        obs_q6 = next(q for q in summary.by_condition["observational"] if q.question == "Q6")
        assert coa_q6.thresholds["somewhat_difficult_or_worse"] == 55.0
        assert obs_q6.thresholds["somewhat_difficult_or_worse"] == 72.0

    def test_satisfaction_headline(self, tmp_path):
        # 22% somewhat unsatisfied, 0% very unsatisfied among 50 coa users.
        rows = []
        for i in range(50):
            answer = "Somewhat unsatisfied" if i < 11 else "Neutral"
            rows.append(respondent(i, Q5="Sometimes", Q7=answer))
        summary = summarize_survey(load_survey_csv(write_csv(tmp_path / "s.csv", rows)), "post")
        q7 = next(q for q in summary.by_condition["coa"] if q.question == "Q7")
        assert q7.thresholds["somewhat_unsatisfied_or_worse"] == 22.0
        assert q7.pct("Very unsatisfied") == 0.0

    def test_somewhat_or_very_unsatisfied_combined(self, tmp_path):
        # 54% somewhat or very unsatisfied among 50 observational users.
        rows = []
        for i in range(50):
            if i < 20:
                answer = "Somewhat unsatisfied"
            elif i < 27:
                answer = "Very unsatisfied"
            else:
                answer = "Neutral"
            rows.append(respondent(i, condition="observational", Q5="Sometimes", Q7=answer))
        summary = summarize_survey(load_survey_csv(write_csv(tmp_path / "s.csv", rows)), "post")
        q7 = next(q for q in summary.by_condition["observational"] if q.question == "Q7")
        assert q7.thresholds["somewhat_unsatisfied_or_worse"] == 54.0

    def test_perceived_mean(self, tmp_path):
        # Ten answers averaging 66.2.
        values = [60, 70, 65, 72, 58, 66, 71, 64, 68, 68]
        assert sum(values) / len(values) == 66.2
        rows = [respondent(i, Q1=str(v)) for i, v in enumerate(values)]
        summary = summarize_survey(load_survey_csv(write_csv(tmp_path / "s.csv", rows)), "pre")
        assert summary.perceived_mean == Fraction(662, 10)
        assert round1(summary.perceived_mean) == 66.2


class TestDistributions:
    def test_distribution_sums_to_100(self, tmp_path):
        rows = [
            respondent(1, Q2="Neutral"),
            respondent(2, Q2="Very uncomfortable"),
            respondent(3, Q2="Somewhat uncomfortable"),
        ]
        summary = summarize_survey(load_survey_csv(write_csv(tmp_path / "s.csv", rows)), "pre")
        q2 = next(q for q in summary.questions if q.question == "Q2")
        total = sum(Fraction(q2.counts[o] * 100, q2.n_answered) for o in q2.counts)
        assert total == 100

    def test_non_answers_excluded(self, tmp_path):
        rows = [respondent(1, Q3="Yes"), respondent(2)]
        summary = summarize_survey(load_survey_csv(write_csv(tmp_path / "s.csv", rows)), "pre")
        q3 = next(q for q in summary.questions if q.question == "Q3")
        assert q3.n_answered == 1
        assert q3.pct("Yes") == 100.0
