"""Submission ingestion, per-category evaluation and ranking tables.

Submissions live under ``<language_pair>/<scenario>/<team>.<description>.txt``
and references under ``<refs>/<language_pair>.txt``, one segment per line.
"""

from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .config import ALPHA, ART_REPETITIONS
from .metrics import CorpusMetric, MetricScore, format_score, get_metric
from .significance import ClusterRanking, PairedSystemStats, art_pvalue, cluster_rank
from .text import read_lines
from .validation import DataContractError

logger = logging.getLogger(__name__)

SCENARIOS = ("constrained", "unconstrained")
METRIC_LABELS = {"bleu": "BLEU", "chrf": "chrF", "ter": "TER", "beer": "BEER", "hter": "hTER"}


@dataclass(frozen=True)
class Submission:
    team: str
    description: str
    scenario: str
    language_pair: str
    hypotheses: tuple[str, ...] = field(repr=False)
    unranked: bool = False

    @property
    def name(self) -> str:
        return f"{self.team}.{self.description}"


@dataclass(frozen=True)
class Diagnostic:
    path: str
    reason: str

    def __str__(self):
        return f"{self.path}: {self.reason}"


def parse_submission_path(rel: Path) -> tuple[str, str, str, str]:
    """Split ``pair/scenario/team.description.txt`` into its four fields."""
    parts = rel.parts
    if len(parts) != 3:
        raise ValueError("expected <language_pair>/<scenario>/<team>.<description>.txt")
    pair, scenario, fname = parts
    if scenario not in SCENARIOS:
        raise ValueError(f"unknown scenario {scenario!r}")
    if not fname.endswith(".txt"):
        raise ValueError("submission files must end in .txt")
    team, sep, description = fname[:-4].partition(".")
    if not sep or not team or not description:
        raise ValueError("file name must be <team>.<description>.txt")
    return pair, scenario, team, description


def load_references(refs_dir: str | Path) -> dict[str, list[str]]:
    refs_dir = Path(refs_dir)
    return {p.stem: read_lines(p) for p in sorted(refs_dir.glob("*.txt"))}


def load_baselines(path: str | Path) -> set[tuple[str, str]]:
    """Manifest of unranked systems, one ``team<TAB>description`` per line."""
    out = set()
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip() or line.startswith("#"):
            continue
        team, sep, description = line.partition("\t")
        if not sep:
            raise DataContractError(f"{path}:{lineno}: expected team<TAB>description")
        out.add((team.strip(), description.strip()))
    return out


def ingest_submissions(root: str | Path, references: Mapping[str, Sequence[str]] | None = None,
                       baselines: Iterable[tuple[str, str]] = ()
                       ) -> tuple[list[Submission], list[Diagnostic]]:
    """Parse every submission file under ``root``.

    Files with malformed paths, or whose line count differs from the
    reference of their language pair, are reported and skipped.
    """
    root = Path(root)
    baselines = set(baselines)
    subs, problems = [], []
    for path in sorted(p for p in root.rglob("*") if p.is_file()):
        rel = path.relative_to(root)
        try:
            pair, scenario, team, description = parse_submission_path(rel)
        except ValueError as exc:
            problems.append(Diagnostic(str(rel), str(exc)))
            continue
        try:
            lines = tuple(read_lines(path))
        except (UnicodeDecodeError, ValueError) as exc:
            problems.append(Diagnostic(str(rel), f"unreadable: {exc}"))
            continue
        if references is not None and pair in references and len(lines) != len(references[pair]):
            problems.append(Diagnostic(
                str(rel), f"{len(lines)} lines but the {pair} reference has {len(references[pair])}"))
            continue
        subs.append(Submission(team, description, scenario, pair, lines,
                               (team, description) in baselines))
    for d in problems:
        logger.warning("rejected %s", d)
    return subs, problems


@dataclass
class SystemResult:
    submission: Submission
    scores: dict[str, MetricScore]


@dataclass
class RankingTable:
    language_pair: str
    scenario: str
    metrics: tuple[str, ...]
    primary: str
    ranking: ClusterRanking
    adjacent_tests: list[dict]

    def rows(self) -> list[dict]:
        """One row per system in ranking order, scores formatted for display."""
        rows = []
        for idx, cluster in enumerate(self.ranking.clusters, 1):
            for res in cluster.members:
                sub = res.submission
                rank = "-" if sub.unranked or cluster.rank is None else str(cluster.rank)
                row = {"cluster": idx, "rank": rank, "team": sub.team,
                       "description": sub.description}
                for m in self.metrics:
                    row[m] = format_score(m, res.scores[m].value)
                rows.append(row)
        return rows


@dataclass
class CampaignReport:
    tables: list[RankingTable]
    diagnostics: list[Diagnostic] = field(default_factory=list)

    def to_json(self) -> str:
        payload = {
            "tables": [
                {
                    "language_pair": t.language_pair,
                    "scenario": t.scenario,
                    "primary": t.primary,
                    "metrics": list(t.metrics),
                    "rows": [
                        {**row, "scores": {m: res.scores[m].value for m in t.metrics}}
                        for row, res in zip(t.rows(), t.ranking.members)
                    ],
                    "adjacent_tests": t.adjacent_tests,
                }
                for t in self.tables
            ],
            "diagnostics": [str(d) for d in self.diagnostics],
        }
        return json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def evaluate_all(submissions: Sequence[Submission], references: Mapping[str, Sequence[str]],
                 metrics: Sequence[str] = ("bleu", "chrf"), *, primary: str = "bleu",
                 alpha: float = ALPHA, repetitions: int = ART_REPETITIONS, seed: int = 0,
                 n_jobs: int = 1, metric_objects: Mapping[str, CorpusMetric] | None = None
                 ) -> CampaignReport:
    """Score, sort, test adjacent systems and cluster every (pair, scenario) group."""
    metrics = tuple(m.lower() for m in metrics)
    if primary not in metrics:
        metrics = (primary,) + metrics
    scorers = {m: (metric_objects or {}).get(m) or get_metric(m) for m in metrics}
    prim = scorers[primary]

    groups: dict[tuple[str, str], list[Submission]] = {}
    for sub in submissions:
        groups.setdefault((sub.language_pair, sub.scenario), []).append(sub)

    tables, problems = [], []
    for (pair, scenario) in sorted(groups):
        if pair not in references:
            problems.append(Diagnostic(f"{pair}/{scenario}", "no reference for this language pair"))
            continue
        refs = references[pair]
        results, stats = [], {}
        for sub in groups[(pair, scenario)]:
            if len(sub.hypotheses) != len(refs):
                problems.append(Diagnostic(
                    f"{pair}/{scenario}/{sub.name}",
                    f"{len(sub.hypotheses)} lines but the reference has {len(refs)}"))
                continue
            scores = {}
            for m, scorer in scorers.items():
                seg = scorer.corpus_stats(sub.hypotheses, refs)
                if m == primary:
                    stats[id(sub)] = seg
                scores[m] = scorer.score_from_stats(seg)
            results.append(SystemResult(sub, scores))
        if not results:
            continue

        sign = -1.0 if prim.higher_is_better else 1.0
        results.sort(key=lambda r: (sign * r.scores[primary].value, r.submission.team,
                                    r.submission.description))
        tests: list[dict] = []

        def significant(a: SystemResult, b: SystemResult) -> bool:
            paired = PairedSystemStats(stats[id(a.submission)], stats[id(b.submission)])
            res = art_pvalue(paired, prim, repetitions=repetitions, seed=seed)
            tests.append({"system_a": a.submission.name, "system_b": b.submission.name,
                          "observed_delta": res.observed_delta, "p_value": res.p_value,
                          "significant": res.p_value < alpha})
            return res.p_value < alpha

        ranking = cluster_rank(results, significant,
                               key=lambda r: r.scores[primary].value,
                               higher_is_better=prim.higher_is_better,
                               unranked=lambda r: r.submission.unranked)
        tables.append(RankingTable(pair, scenario, metrics, primary, ranking, tests))
    for d in problems:
        logger.warning("%s", d)
    return CampaignReport(tables, problems)


def _header(metric: str) -> str:
    arrow = "↓" if metric in ("ter", "hter") else "↑"
    return f"{METRIC_LABELS.get(metric, metric)} [{arrow}]"


def _markdown_table(table: RankingTable) -> list[str]:
    cols = ["Rank", "Team", "Description"] + [_header(m) for m in table.metrics]
    sep = "|" + "|".join("---" for _ in cols) + "|"
    lines = [f"### {table.language_pair} / {table.scenario}", "",
             "| " + " | ".join(cols) + " |", sep]
    prev = None
    for row in table.rows():
        if prev is not None and row["cluster"] != prev:
            lines.append(sep)
        prev = row["cluster"]
        cells = [row["rank"], row["team"], row["description"]] + [row[m] for m in table.metrics]
        lines.append("| " + " | ".join(cells) + " |")
    return lines


def emit_ranking(report: CampaignReport, fmt: str = "markdown") -> str:
    """Render every table. Markdown marks cluster boundaries with a rule row;
    CSV carries a ``cluster`` column instead."""
    if not report.tables:
        raise ValueError("report has no tables to render")
    if fmt == "markdown":
        blocks = ["\n".join(_markdown_table(t)) for t in report.tables]
        return "\n\n".join(blocks) + "\n"
    if fmt == "csv":
        metrics = []
        for t in report.tables:
            metrics.extend(m for m in t.metrics if m not in metrics)
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["language_pair", "scenario", "cluster", "rank", "team", "description",
                         *metrics])
        for t in report.tables:
            for row in t.rows():
                writer.writerow([t.language_pair, t.scenario, row["cluster"], row["rank"],
                                 row["team"], row["description"],
                                 *(row.get(m, "") for m in metrics)])
        return buf.getvalue()
    raise ValueError(f"unknown format {fmt!r}; use markdown or csv")
