"""Character n-gram F-score.

F is computed per order from clipped precision and recall, then the
per-order F values are averaged arithmetically. Character n-grams include
the single spaces left by normalization.
"""

from __future__ import annotations

import numpy as np

from ..text import char_ngrams, normalize
from ..validation import check_positive_int
from .base import SCALE_1, CorpusMetric, MetricScore

DEFAULT_CHAR_ORDER = 6
DEFAULT_BETA = 2.0


def char_stats(hyp: str, ref: str, max_order: int) -> np.ndarray:
    """Per order: clipped matches, hypothesis n-grams, reference n-grams."""
    out = np.zeros(3 * max_order, dtype=np.int64)
    for k in range(1, max_order + 1):
        h = char_ngrams(hyp, k)
        r = char_ngrams(ref, k)
        out[3 * (k - 1)] = sum(min(c, r[g]) for g, c in h.items())
        out[3 * (k - 1) + 1] = max(0, len(hyp) - k + 1)
        out[3 * (k - 1) + 2] = max(0, len(ref) - k + 1)
    return out


def f_scores(totals: np.ndarray, max_order: int, beta: float) -> tuple[np.ndarray, np.ndarray]:
    """Per-order F values and a mask of orders with reference n-grams."""
    totals = np.asarray(totals, dtype=np.float64)
    shaped = totals.reshape(totals.shape[:-1] + (max_order, 3))
    matches, hyp_n, ref_n = shaped[..., 0], shaped[..., 1], shaped[..., 2]
    b2 = beta * beta
    with np.errstate(divide="ignore", invalid="ignore"):
        prec = np.where(hyp_n > 0, matches / np.where(hyp_n > 0, hyp_n, 1), 0.0)
        rec = np.where(ref_n > 0, matches / np.where(ref_n > 0, ref_n, 1), 0.0)
        denom = b2 * prec + rec
        f = np.where(denom > 0, (1 + b2) * prec * rec / np.where(denom > 0, denom, 1), 0.0)
    return f, ref_n > 0


def chrf_from_totals(totals: np.ndarray, max_order: int, beta: float) -> np.ndarray:
    f, valid = f_scores(totals, max_order, beta)
    n_valid = valid.sum(axis=-1)
    summed = np.where(valid, f, 0.0).sum(axis=-1)
    return np.where(n_valid > 0, summed / np.where(n_valid > 0, n_valid, 1), 0.0)


def chrf(hyp: str, ref: str, max_order: int = DEFAULT_CHAR_ORDER,
         beta: float = DEFAULT_BETA) -> MetricScore:
    check_positive_int(max_order, "max_order")
    hyp, ref = normalize(hyp), normalize(ref)
    if not ref:
        raise ValueError("chrF needs a non-empty reference")
    value = float(chrf_from_totals(char_stats(hyp, ref, max_order), max_order, beta))
    return MetricScore("chrf", value, SCALE_1)


class CHRF(CorpusMetric):
    """chrF on a 0-1 scale; the corpus score pools n-gram counts over segments."""

    metric_id = "chrf"
    scale = SCALE_1

    def __init__(self, max_order=DEFAULT_CHAR_ORDER, beta=DEFAULT_BETA, lowercase=False):
        self.max_order = max_order
        self.beta = beta
        self.lowercase = lowercase

    def _prep(self, text: str) -> str:
        text = normalize(text)
        return text.lower() if self.lowercase else text

    def segment_stats(self, hyp: str, ref: str) -> np.ndarray:
        return char_stats(self._prep(hyp), self._prep(ref), self.max_order)

    def aggregate(self, totals: np.ndarray) -> np.ndarray:
        return chrf_from_totals(totals, self.max_order, self.beta)
