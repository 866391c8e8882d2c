from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator

from ..validation import check_aligned

SCALE_100 = "0-100"
SCALE_1 = "0-1"


@dataclass(frozen=True)
class MetricScore:
    metric_id: str
    value: float
    reported_scale: str

    def formatted(self) -> str:
        return format_score(self.metric_id, self.value)


def format_score(metric_id: str, value: float) -> str:
    # chrF is shown with three decimals, everything else with one
    return f"{value:.3f}" if metric_id == "chrf" else f"{value:.1f}"


class CorpusMetric(BaseEstimator):
    """Base class for metrics built from additive per-segment statistics.

    Subclasses implement ``segment_stats`` (one 1-D vector per segment) and
    ``aggregate`` (summed vectors to a score on the reported scale). Because
    the corpus score only depends on the column sums, paired resampling can
    swap rows and re-aggregate without touching the text again.
    """

    metric_id = ""
    scale = SCALE_100
    higher_is_better = True

    def segment_stats(self, hyp: str, ref: str) -> np.ndarray:
        raise NotImplementedError

    def aggregate(self, totals: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def stats_dtype(self):
        return np.int64

    def corpus_stats(self, hyps: Sequence[str], refs: Sequence[str]) -> np.ndarray:
        check_aligned(hyps, refs)
        rows = [self.segment_stats(h, r) for h, r in zip(hyps, refs)]
        if not rows:
            raise ValueError("cannot score an empty corpus")
        return np.vstack(rows).astype(self.stats_dtype())

    def score_from_stats(self, stats: np.ndarray) -> MetricScore:
        stats = np.asarray(stats)
        if stats.ndim != 2 or stats.shape[0] == 0:
            raise ValueError("expected a non-empty (segments, features) array")
        value = float(self.aggregate(stats.sum(axis=0)))
        return MetricScore(self.metric_id, value, self.scale)

    def corpus_score(self, hyps: Sequence[str], refs: Sequence[str]) -> MetricScore:
        return self.score_from_stats(self.corpus_stats(hyps, refs))

    def sentence_score(self, hyp: str, ref: str) -> MetricScore:
        return self.score_from_stats(self.segment_stats(hyp, ref)[None, :])
