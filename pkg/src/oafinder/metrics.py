"""Citation-impact analytics: percent-OA tables, within-issue OA citation
advantage with exclusion rules, citation-range cohort tables, and summary
statistics, plus deterministic CSV report writers.

All functions are pure over immutable record collections; report ordering is
always sorted by group key so reruns are byte-identical.
"""

from __future__ import annotations

import csv
import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Optional

from .records import ALL_RANGES, ArticleRecord, CitationRange, OAStatus

GROUP_DIMENSIONS = ("discipline", "country", "year", "journal")

# Exclusion reasons
ALL_OA_JOURNAL = "ALL_OA_JOURNAL"
ALL_OA_ISSUE = "ALL_OA_ISSUE"
ALL_NOA_ISSUE = "ALL_NOA_ISSUE"
ZERO_NOA_CITATIONS = "ZERO_NOA_CITATIONS"


class MetricsError(ValueError):
    pass


class UnresolvedStatusError(MetricsError):
    """Records still carry UNKNOWN status; run detection first."""


def _group_key(rec: ArticleRecord, dimension: str):
    if dimension == "journal":
        return rec.journal_id
    if dimension in ("discipline", "country", "year"):
        return getattr(rec, dimension)
    raise MetricsError(f"unknown grouping dimension {dimension!r}")


def _require_resolved(records) -> None:
    for rec in records:
        if rec.oa_status is OAStatus.UNKNOWN:
            raise UnresolvedStatusError(
                f"record {rec.id} has UNKNOWN status; run detection first"
            )


# ---------------------------------------------------------------------------
# Exclusion rules
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Exclusion:
    kind: str  # "journal" or "issue"
    key: str
    reason: str
    n_records: int


def apply_exclusions(records: list[ArticleRecord]
                     ) -> tuple[list[ArticleRecord], list[Exclusion]]:
    """Drop all-OA journals, then all-OA issues among the survivors.

    Returns the kept records (input order preserved) and a log naming each
    excluded journal/issue. Idempotent.
    """
    _require_resolved(records)
    log: list[Exclusion] = []

    by_journal = defaultdict(list)
    for rec in records:
        by_journal[rec.journal_id].append(rec)
    bad_journals = set()
    for journal_id in sorted(by_journal):
        members = by_journal[journal_id]
        if all(r.oa_status is OAStatus.OA for r in members):
            bad_journals.add(journal_id)
            log.append(Exclusion("journal", journal_id, ALL_OA_JOURNAL, len(members)))

    survivors = [r for r in records if r.journal_id not in bad_journals]

    by_issue = defaultdict(list)
    for rec in survivors:
        by_issue[rec.issue_key].append(rec)
    bad_issues = set()
    for issue_key in sorted(by_issue):
        members = by_issue[issue_key]
        if all(r.oa_status is OAStatus.OA for r in members):
            bad_issues.add(issue_key)
            log.append(Exclusion("issue", issue_key, ALL_OA_ISSUE, len(members)))

    kept = [r for r in survivors if r.issue_key not in bad_issues]
    return kept, log


# ---------------------------------------------------------------------------
# Percent OA
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OAShareReport:
    group: object
    n_oa: int
    n_noa: int

    @property
    def percent_oa(self) -> float:
        return self.n_oa / (self.n_oa + self.n_noa)


def percent_oa(records: list[ArticleRecord], group_by: str) -> list[OAShareReport]:
    """Per-group OA share n_oa / (n_oa + n_noa), sorted by group key."""
    _require_resolved(records)
    counts = defaultdict(lambda: [0, 0])
    for rec in records:
        c = counts[_group_key(rec, group_by)]
        if rec.oa_status is OAStatus.OA:
            c[0] += 1
        else:
            c[1] += 1
    return [OAShareReport(g, counts[g][0], counts[g][1]) for g in sorted(counts)]


# ---------------------------------------------------------------------------
# Within-issue citation advantage
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IssueStats:
    issue_key: str
    n_oa: int
    n_noa: int
    mean_cit_oa: float
    mean_cit_noa: float


def issue_stats(issue_records: list[ArticleRecord]) -> IssueStats:
    if not issue_records:
        raise MetricsError("empty issue")
    key = issue_records[0].issue_key
    oa = [r.citation_count for r in issue_records if r.oa_status is OAStatus.OA]
    noa = [r.citation_count for r in issue_records if r.oa_status is OAStatus.NOA]
    return IssueStats(
        issue_key=key,
        n_oa=len(oa),
        n_noa=len(noa),
        mean_cit_oa=sum(oa) / len(oa) if oa else 0.0,
        mean_cit_noa=sum(noa) / len(noa) if noa else 0.0,
    )


def issue_advantage(issue_records: list[ArticleRecord]
                    ) -> tuple[Optional[float], Optional[str]]:
    """(mean_cit_oa - mean_cit_noa) / mean_cit_noa for one issue.

    Returns (value, None) when includable, else (None, exclusion reason):
    issues that are 100% or 0% OA, or whose NOA members are all uncited, have
    no defined ratio.
    """
    st = issue_stats(issue_records)
    if st.n_oa == 0:
        return None, ALL_NOA_ISSUE
    if st.n_noa == 0:
        return None, ALL_OA_ISSUE
    if st.mean_cit_noa == 0.0:
        return None, ZERO_NOA_CITATIONS
    return (st.mean_cit_oa - st.mean_cit_noa) / st.mean_cit_noa, None


@dataclass(frozen=True)
class AdvantageReport:
    group: object
    advantage: Optional[float]  # None = NO_DATA
    n_issues_included: int
    n_issues_excluded: int
    exclusion_reasons: tuple[str, ...]


def aggregate_advantage(records: list[ArticleRecord], group_by: str,
                        weighting: str = "unweighted") -> list[AdvantageReport]:
    """Per-issue ratios averaged to journal, then journals averaged to group.

    weighting="unweighted" (default) averages issues and journals with equal
    weight; "articles" weights each issue/journal by its article count.
    """
    _require_resolved(records)
    if weighting not in ("unweighted", "articles"):
        raise MetricsError(f"unknown weighting {weighting!r}")

    by_issue = defaultdict(list)
    for rec in records:
        by_issue[rec.issue_key].append(rec)

    # (group, journal) -> list of (issue ratio, issue size); a journal spans
    # groups when grouping by year, so the journal level is keyed per group.
    journal_ratios = defaultdict(list)
    excluded = defaultdict(list)
    for issue_key in sorted(by_issue):
        members = by_issue[issue_key]
        group = _group_key(members[0], group_by)
        ratio, reason = issue_advantage(members)
        if ratio is None:
            excluded[group].append(reason)
        else:
            journal_ratios[(group, members[0].journal_id)].append(
                (ratio, len(members)))

    # journal-level means, then group-level means
    group_journals = defaultdict(list)
    for group, journal_id in sorted(journal_ratios, key=lambda k: (str(k[0]), k[1])):
        pairs = journal_ratios[(group, journal_id)]
        total = sum(n for _, n in pairs)
        if weighting == "articles":
            jmean = sum(r * n for r, n in pairs) / total
        else:
            jmean = sum(r for r, _ in pairs) / len(pairs)
        group_journals[group].append((jmean, total, len(pairs)))

    reports = []
    for group in sorted(set(group_journals) | set(excluded), key=str):
        entries = group_journals.get(group, [])
        n_inc = sum(n_issues for _, _, n_issues in entries)
        n_exc = len(excluded.get(group, []))
        if not entries:
            adv = None
        elif weighting == "articles":
            total = sum(n for _, n, _ in entries)
            adv = sum(m * n for m, n, _ in entries) / total
        else:
            adv = sum(m for m, _, _ in entries) / len(entries)
        reports.append(AdvantageReport(
            group=group, advantage=adv, n_issues_included=n_inc,
            n_issues_excluded=n_exc,
            exclusion_reasons=tuple(sorted(set(excluded.get(group, [])))),
        ))
    return reports


# ---------------------------------------------------------------------------
# Citation-range cohorts
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CohortCell:
    """Shares of the OA and NOA populations falling in one citation range."""

    oa_share: float
    noa_share: float
    ratio: Optional[float]  # undefined when noa_share == 0
    delta: Optional[float]  # (oa_share - noa_share) / noa_share


def cohort_cell(oa_in_range: int, oa_total: int,
                noa_in_range: int, noa_total: int) -> CohortCell:
    if oa_total < 1 or noa_total < 1:
        raise MetricsError("both populations must be non-empty")
    oa_share = oa_in_range / oa_total
    noa_share = noa_in_range / noa_total
    if noa_share == 0.0:
        return CohortCell(oa_share, noa_share, None, None)
    return CohortCell(oa_share, noa_share, oa_share / noa_share,
                      (oa_share - noa_share) / noa_share)


def cohort_table(records: list[ArticleRecord], per_year: bool = True
                 ) -> dict[object, dict[CitationRange, CohortCell]]:
    """OA_c / NOA_c shares per citation range, keyed by year (per_year) or by
    the single key "all" (pooled over all years). Groups where either
    population is empty have no defined shares and are omitted."""
    _require_resolved(records)
    counts = defaultdict(lambda: defaultdict(lambda: [0, 0]))  # key -> range -> [oa, noa]
    totals = defaultdict(lambda: [0, 0])
    for rec in records:
        key = rec.year if per_year else "all"
        slot = counts[key][rec.citation_range]
        if rec.oa_status is OAStatus.OA:
            slot[0] += 1
            totals[key][0] += 1
        else:
            slot[1] += 1
            totals[key][1] += 1
    table = {}
    for key in sorted(counts, key=str):
        oa_total, noa_total = totals[key]
        if oa_total < 1 or noa_total < 1:
            continue
        table[key] = {
            rng: cohort_cell(counts[key][rng][0], oa_total,
                             counts[key][rng][1], noa_total)
            for rng in ALL_RANGES
        }
    return table


# ---------------------------------------------------------------------------
# Summary statistics
# ---------------------------------------------------------------------------

def summary_stats(values: list[float]) -> dict[str, float]:
    """Mean, median (mean of middle two for even n) and sample SD (n-1)."""
    n = len(values)
    if n == 0:
        raise MetricsError("summary_stats needs a non-empty list")
    if n == 1:
        raise MetricsError("SD_UNDEFINED for n=1")
    mean = sum(values) / n
    s = sorted(values)
    median = s[n // 2] if n % 2 else (s[n // 2 - 1] + s[n // 2]) / 2.0
    sd = math.sqrt(sum((v - mean) ** 2 for v in values) / (n - 1))
    return {"mean": mean, "median": median, "sd": sd}


# ---------------------------------------------------------------------------
# CSV report writers
# ---------------------------------------------------------------------------

def _fmt_pct(x: Optional[float]) -> str:
    return "" if x is None else f"{100.0 * x:.1f}"


def _fmt(x: Optional[float]) -> str:
    return "" if x is None else repr(round(x, 12))


def write_oa_share_csv(reports: list[OAShareReport], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["group", "n_oa", "n_noa", "percent_oa"])
        for rep in reports:
            w.writerow([rep.group, rep.n_oa, rep.n_noa, _fmt_pct(rep.percent_oa)])


def write_advantage_csv(reports: list[AdvantageReport], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["group", "advantage_pct", "n_issues_included",
                    "n_issues_excluded", "exclusion_reasons"])
        for rep in reports:
            w.writerow([
                rep.group,
                "NO_DATA" if rep.advantage is None else _fmt_pct(rep.advantage),
                rep.n_issues_included, rep.n_issues_excluded,
                ";".join(rep.exclusion_reasons),
            ])


def write_cohort_csv(table, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["group", "citation_range", "oa_share_pct", "noa_share_pct",
                    "ratio", "delta_pct"])
        for key in sorted(table, key=str):
            for rng in ALL_RANGES:
                cell = table[key][rng]
                w.writerow([
                    key, rng.value, _fmt_pct(cell.oa_share),
                    _fmt_pct(cell.noa_share),
                    "undefined" if cell.ratio is None else _fmt(cell.ratio),
                    "undefined" if cell.delta is None else _fmt_pct(cell.delta),
                ])


def write_correlations_csv(rows, path) -> None:
    """rows: iterable of (pair_name, CorrelationResult or None)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["pair", "r", "n", "t", "df", "p_two_tailed", "p_one_tailed"])
        for name, res in rows:
            if res is None:
                w.writerow([name, "ZERO_VARIANCE", "", "", "", "", ""])
            else:
                w.writerow([name, _fmt(res.r), res.n, _fmt(res.t_stat), res.df,
                            _fmt(res.p_two_tailed), _fmt(res.p_one_tailed)])


def write_sdt_csv(m, result, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["hits", "misses", "false_alarms", "correct_rejections",
                    "hit_rate", "fa_rate", "d_prime", "beta", "criterion_c",
                    "correction_applied"])
        w.writerow([m.hits, m.misses, m.false_alarms, m.correct_rejections,
                    _fmt(result.hit_rate), _fmt(result.fa_rate),
                    _fmt(result.d_prime), _fmt(result.beta),
                    _fmt(result.criterion_c), str(result.correction_applied).lower()])


def write_exclusions_csv(log: list[Exclusion], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["kind", "key", "reason", "n_records"])
        for exc in log:
            w.writerow([exc.kind, exc.key, exc.reason, exc.n_records])
