"""Corpus BLEU from clipped n-gram matches and a brevity penalty."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..text import ngrams, normalize, tokenize_words
from ..validation import check_positive_int
from .base import SCALE_100, CorpusMetric, MetricScore

DEFAULT_MAX_ORDER = 4


@dataclass(frozen=True)
class BleuStats:
    max_order: int
    clipped_matches: tuple[int, ...]
    hyp_totals: tuple[int, ...]
    hyp_len: int
    ref_len: int

    def __post_init__(self):
        if len(self.clipped_matches) != self.max_order or len(self.hyp_totals) != self.max_order:
            raise ValueError("per-order counts must have max_order entries")
        if any(not 0 <= m <= t for m, t in zip(self.clipped_matches, self.hyp_totals)):
            raise ValueError("clipped matches must lie in [0, hyp_totals]")

    def __add__(self, other: "BleuStats") -> "BleuStats":
        if other.max_order != self.max_order:
            raise ValueError("cannot add BleuStats of different max_order")
        return BleuStats(
            self.max_order,
            tuple(a + b for a, b in zip(self.clipped_matches, other.clipped_matches)),
            tuple(a + b for a, b in zip(self.hyp_totals, other.hyp_totals)),
            self.hyp_len + other.hyp_len,
            self.ref_len + other.ref_len,
        )

    def as_array(self) -> np.ndarray:
        return np.array(
            [*self.clipped_matches, *self.hyp_totals, self.hyp_len, self.ref_len],
            dtype=np.int64,
        )

    @classmethod
    def from_array(cls, arr) -> "BleuStats":
        arr = [int(x) for x in arr]
        n = (len(arr) - 2) // 2
        return cls(n, tuple(arr[:n]), tuple(arr[n:2 * n]), arr[2 * n], arr[2 * n + 1])


def bleu_segment_stats(hyp: Sequence[str], ref: Sequence[str],
                       max_order: int = DEFAULT_MAX_ORDER) -> BleuStats:
    check_positive_int(max_order, "max_order")
    matches, totals = [], []
    for n in range(1, max_order + 1):
        hyp_counts = ngrams(hyp, n)
        ref_counts = ngrams(ref, n)
        matches.append(sum(min(c, ref_counts[g]) for g, c in hyp_counts.items()))
        totals.append(max(0, len(hyp) - n + 1))
    return BleuStats(max_order, tuple(matches), tuple(totals), len(hyp), len(ref))


def bleu_from_totals(totals: np.ndarray, max_order: int, smooth_k: float = 0.0) -> np.ndarray:
    """Vectorised BLEU (0-100) over the last axis of summed statistics."""
    totals = np.asarray(totals, dtype=np.float64)
    matches = totals[..., :max_order]
    counts = totals[..., max_order:2 * max_order]
    hyp_len = totals[..., 2 * max_order]
    ref_len = totals[..., 2 * max_order + 1]
    if smooth_k > 0 and max_order > 1:
        # add-k on orders >= 2 only, unigram precision stays unsmoothed
        matches = matches.copy()
        counts = counts.copy()
        matches[..., 1:] += smooth_k
        counts[..., 1:] += smooth_k
    # orders with no hypothesis n-grams (0/0) drop out of the geometric mean
    defined = counts > 0
    n_defined = defined.sum(axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        precisions = np.where(defined, matches / np.where(defined, counts, 1), 1.0)
        zero = (precisions <= 0).any(axis=-1) | (hyp_len <= 0) | (n_defined == 0)
        log_mean = (np.log(np.where(precisions > 0, precisions, 1.0)).sum(axis=-1)
                    / np.maximum(n_defined, 1))
        bp = np.where(hyp_len > ref_len, 1.0,
                      np.exp(1.0 - ref_len / np.where(hyp_len > 0, hyp_len, 1.0)))
    return np.where(zero, 0.0, 100.0 * bp * np.exp(log_mean))


def corpus_bleu(stats: Sequence[BleuStats], smooth_k: float = 0.0) -> MetricScore:
    if not stats:
        raise ValueError("corpus_bleu needs at least one segment")
    orders = {s.max_order for s in stats}
    if len(orders) != 1:
        raise ValueError("all BleuStats must share max_order")
    total = np.sum([s.as_array() for s in stats], axis=0)
    value = float(bleu_from_totals(total, orders.pop(), smooth_k))
    return MetricScore("bleu", value, SCALE_100)


def brevity_penalty(hyp_len: int, ref_len: int) -> float:
    if hyp_len > ref_len:
        return 1.0
    if hyp_len == 0:
        return 0.0
    return float(np.exp(1.0 - ref_len / hyp_len))


class BLEU(CorpusMetric):
    """Corpus BLEU on package tokenization, reported on 0-100.

    Parameters
    ----------
    max_order : int
        Highest n-gram order.
    lowercase : bool
        Case-fold both sides before tokenizing.
    smooth_k : float
        Add-k smoothing for orders >= 2; 0 disables it (corpus default).
    """

    metric_id = "bleu"

    def __init__(self, max_order=DEFAULT_MAX_ORDER, lowercase=False, smooth_k=0.0):
        self.max_order = max_order
        self.lowercase = lowercase
        self.smooth_k = smooth_k

    def segment_stats(self, hyp: str, ref: str) -> np.ndarray:
        return bleu_segment_stats(
            tokenize_words(normalize(hyp), self.lowercase),
            tokenize_words(normalize(ref), self.lowercase),
            self.max_order,
        ).as_array()

    def aggregate(self, totals: np.ndarray) -> np.ndarray:
        return bleu_from_totals(totals, self.max_order, self.smooth_k)
