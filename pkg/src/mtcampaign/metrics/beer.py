"""Linear sentence-level metric over character and word match features."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from ..text import char_ngrams, ngrams, normalize, tokenize_words
from .base import SCALE_100, CorpusMetric, MetricScore

FEATURE_NAMES = (
    "char_f1_1", "char_f1_2", "char_f1_3", "char_f1_4", "char_f1_5", "char_f1_6",
    "word_precision", "word_recall", "word_f1",
    "length_ratio",
)


@dataclass(frozen=True)
class BeerModel:
    feature_names: tuple[str, ...]
    weights: np.ndarray = field(compare=False)

    def __post_init__(self):
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        weights = np.asarray(self.weights, dtype=np.float64)
        object.__setattr__(self, "weights", weights)
        if weights.ndim != 1 or len(weights) != len(self.feature_names):
            raise ValueError(
                f"{len(self.feature_names)} features but {weights.size} weights"
            )
        if not np.all(np.isfinite(weights)):
            raise ValueError("BEER weights must be finite")

    @classmethod
    def uniform(cls) -> "BeerModel":
        return cls(FEATURE_NAMES, np.full(len(FEATURE_NAMES), 1.0 / len(FEATURE_NAMES)))

    @classmethod
    def load(cls, path: str | Path) -> "BeerModel":
        """Read ``name<TAB>weight`` lines; blank lines and ``#`` comments are skipped."""
        names, weights = [], []
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.rstrip("\n")
                if not line.strip() or line.startswith("#"):
                    continue
                parts = line.split("\t")
                if len(parts) != 2:
                    raise ValueError(f"{path}:{lineno}: expected feature<TAB>weight")
                names.append(parts[0])
                weights.append(float(parts[1]))
        model = cls(tuple(names), np.array(weights))
        if model.feature_names != FEATURE_NAMES:
            raise ValueError(
                f"{path}: features must be, in order: {', '.join(FEATURE_NAMES)}"
            )
        return model

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for name, w in zip(self.feature_names, self.weights):
                fh.write(f"{name}\t{float(w)!r}\n")


def _f1(p: float, r: float) -> float:
    return 2 * p * r / (p + r) if p + r > 0 else 0.0


def _clipped_f1(hyp_counts, ref_counts) -> float | None:
    """Clipped-match F1, or None when the reference has no n-grams of this order."""
    ref_total = sum(ref_counts.values())
    if ref_total == 0:
        return None
    hyp_total = sum(hyp_counts.values())
    if hyp_total == 0:
        return 0.0
    matches = sum(min(c, ref_counts[g]) for g, c in hyp_counts.items())
    return _f1(matches / hyp_total, matches / ref_total)


def beer_features(hyp: str, ref: str) -> np.ndarray:
    hyp, ref = normalize(hyp), normalize(ref)
    feats = []
    for n in range(1, 7):
        f = _clipped_f1(char_ngrams(hyp, n), char_ngrams(ref, n))
        # orders longer than the reference repeat the last defined order
        feats.append(feats[-1] if f is None else f)

    h_tok, r_tok = tokenize_words(hyp), tokenize_words(ref)
    h_uni, r_uni = ngrams(h_tok, 1), ngrams(r_tok, 1)
    matches = sum(min(c, r_uni[g]) for g, c in h_uni.items())
    prec = matches / len(h_tok) if h_tok else 0.0
    rec = matches / len(r_tok) if r_tok else 0.0
    feats += [prec, rec, _f1(prec, rec)]

    ratio = min(len(h_tok) / len(r_tok), 2.0) if r_tok else 0.0
    # folded so the feature peaks when lengths agree
    feats.append(1.0 - abs(1.0 - ratio))
    return np.array(feats)


def beer(hyp: str, ref: str, model: BeerModel | None = None) -> MetricScore:
    model = model or BeerModel.uniform()
    if not normalize(ref):
        raise ValueError("BEER needs a non-empty reference")
    feats = beer_features(hyp, ref)
    if len(feats) != len(model.weights):
        raise ValueError("feature/weight length mismatch")
    raw = math.fsum(feats * model.weights)
    value = min(max(raw, 0.0), 1.0) * 100.0
    return MetricScore("beer", value, SCALE_100)


class BEER(CorpusMetric):
    """Mean sentence-level BEER score (0-100) over the corpus."""

    metric_id = "beer"

    def __init__(self, model=None):
        self.model = model

    def stats_dtype(self):
        return np.float64

    def segment_stats(self, hyp: str, ref: str) -> np.ndarray:
        return np.array([beer(hyp, ref, self.model).value, 1.0])

    def aggregate(self, totals: np.ndarray) -> np.ndarray:
        totals = np.asarray(totals, dtype=np.float64)
        return totals[..., 0] / totals[..., 1]


def feature_table(hyps: Sequence[str], refs: Sequence[str]) -> np.ndarray:
    return np.vstack([beer_features(h, r) for h, r in zip(hyps, refs)])
