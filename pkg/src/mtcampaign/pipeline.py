"""Bitext filtering and train/validation/test construction from scored pairs.

Alignment scores come from an external aligner and are taken as input.
All sorts are stable on input order so that score ties resolve the same way
on every run.
"""

from __future__ import annotations

import json
import csv
import math
from fractions import Fraction
from pathlib import Path
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .config import WORST_K, SplitConfig
from .metrics import BLEU, CHRF
from .text import normalize, strip_punct, tokenize_words, write_lines
from .validation import DataContractError, check_aligned, check_finite, check_positive_int

STAGES = ("below_threshold", "empty", "identical", "duplicate", "near_duplicate")


@dataclass(frozen=True)
class SegmentPair:
    source_text: str
    target_text: str
    align_score: float
    provenance: str

    def __post_init__(self):
        check_finite(self.align_score, "align_score")
        if not self.provenance:
            raise DataContractError("provenance label must be non-empty")

    @cached_property
    def source_words(self) -> int:
        return len(tokenize_words(normalize(self.source_text)))

    @cached_property
    def target_words(self) -> int:
        return len(tokenize_words(normalize(self.target_text)))

    @property
    def key(self) -> tuple[str, str]:
        return self.source_text, self.target_text


def read_pairs_tsv(path: str | Path, header: bool = False) -> list[SegmentPair]:
    """Read ``source, target, align_score, provenance`` rows."""
    pairs = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh, delimiter="\t", quoting=csv.QUOTE_NONE)
        for lineno, row in enumerate(reader, 1):
            if header and lineno == 1:
                continue
            if len(row) != 4:
                raise DataContractError(f"{path}:{lineno}: expected 4 columns, got {len(row)}")
            try:
                score = float(row[2])
            except ValueError:
                raise DataContractError(f"{path}:{lineno}: bad align_score {row[2]!r}") from None
            try:
                pairs.append(SegmentPair(row[0], row[1], score, row[3]))
            except DataContractError as exc:
                raise DataContractError(f"{path}:{lineno}: {exc}") from None
    return pairs


def write_pairs_tsv(path: str | Path, pairs: Iterable[SegmentPair]) -> None:
    write_lines(path, (f"{p.source_text}\t{p.target_text}\t{p.align_score!r}\t{p.provenance}"
                       for p in pairs))


def write_bitext(out_dir: str | Path, name: str, pairs: Sequence[SegmentPair]) -> None:
    out_dir = Path(out_dir)
    write_lines(out_dir / f"{name}.src", (p.source_text for p in pairs))
    write_lines(out_dir / f"{name}.tgt", (p.target_text for p in pairs))


def near_dup_key(text: str) -> str:
    return " ".join(strip_punct(normalize(text).casefold()).split())


def filter_battery(pairs: Iterable[SegmentPair],
                   cfg: SplitConfig | None = None) -> tuple[list[SegmentPair], dict[str, int]]:
    """Drop low-score, empty, identical, duplicate and near-duplicate pairs, in that order.

    Returns the surviving pairs and the number removed at each stage.
    """
    cfg = cfg or SplitConfig()
    audit = dict.fromkeys(STAGES, 0)
    kept = []
    seen_exact, seen_near = set(), set()
    for pair in pairs:
        if pair.align_score < cfg.min_align_score:
            audit["below_threshold"] += 1
            continue
        src, tgt = normalize(pair.source_text), normalize(pair.target_text)
        if not src or not tgt:
            audit["empty"] += 1
            continue
        if src == tgt:
            audit["identical"] += 1
            continue
        if pair.key in seen_exact:
            audit["duplicate"] += 1
            continue
        seen_exact.add(pair.key)
        near = (near_dup_key(src), near_dup_key(tgt))
        if near in seen_near:
            audit["near_duplicate"] += 1
            continue
        seen_near.add(near)
        kept.append(pair)
    return kept, audit


def remove_outliers(pairs: Iterable[SegmentPair], cfg: SplitConfig | None = None) -> list[SegmentPair]:
    cfg = cfg or SplitConfig()
    return [p for p in pairs if p.source_words <= cfg.max_words and p.target_words <= cfg.max_words]


def mean_source_words(pairs: Sequence[SegmentPair]) -> float:
    if not pairs:
        raise ValueError("cannot average over an empty set of pairs")
    return sum(p.source_words for p in pairs) / len(pairs)


def window_bounds(avg: float, cfg: SplitConfig | None = None) -> tuple[float, float]:
    cfg = cfg or SplitConfig()
    if not avg > 0:
        raise ValueError(f"average word count must be positive, got {avg}")
    return cfg.ratio_low * avg, cfg.ratio_high * avg


def length_window(pairs: Iterable[SegmentPair], avg: float,
                  cfg: SplitConfig | None = None) -> list[SegmentPair]:
    """Keep pairs whose source length lies in [ratio_low*avg, ratio_high*avg], inclusive."""
    lo, hi = window_bounds(avg, cfg)
    return [p for p in pairs if lo <= p.source_words <= hi]


def sort_by_score(pairs: Iterable[SegmentPair], descending: bool = True) -> list[SegmentPair]:
    # sorted() is stable, so equal scores keep input order either way
    return sorted(pairs, key=lambda p: -p.align_score if descending else p.align_score)


@dataclass
class Round1Result:
    test: list[SegmentPair]
    shortfall: bool
    audit: dict = field(default_factory=dict)


def round1_select_test(pairs: Sequence[SegmentPair], train_avg_words: float,
                       cfg: SplitConfig | None = None) -> Round1Result:
    """Best-scored in-window segments of a candidate test pool."""
    cfg = cfg or SplitConfig()
    ranked = sort_by_score(pairs)
    windowed = length_window(ranked, train_avg_words, cfg)
    test = windowed[:cfg.round1_test_size]
    shortfall = len(test) < cfg.round1_test_size
    lo, hi = window_bounds(train_avg_words, cfg)
    audit = {
        "input": len(pairs),
        "outside_window": len(pairs) - len(windowed),
        "not_selected": len(windowed) - len(test),
        "test": len(test),
        "train_avg_words": train_avg_words,
        "window": [lo, hi],
        "shortfall": cfg.round1_test_size - len(test) if shortfall else 0,
        "config": cfg.as_dict(),
    }
    return Round1Result(test, shortfall, audit)


def source_proportions(pairs: Sequence[SegmentPair]) -> dict[str, float]:
    """Fraction of pairs per provenance label, in order of first appearance."""
    if not pairs:
        raise ValueError("source_proportions needs at least one pair")
    counts: dict[str, int] = {}
    for p in pairs:
        counts[p.provenance] = counts.get(p.provenance, 0) + 1
    return {k: v / len(pairs) for k, v in counts.items()}


def apportion(fractions: Mapping[str, float], quota: int,
              capacity: Mapping[str, int] | None = None) -> tuple[dict[str, int], dict[str, int]]:
    """Largest-remainder seat allocation, capped by per-stratum capacity.

    Seats a stratum cannot fill move to strata with spare capacity in
    order of decreasing fractional remainder. Returns (quotas, deficits)
    where deficits records how many seats each exhausted stratum gave up.
    """
    ideal = {k: quota * f for k, f in fractions.items()}
    seats = {k: math.floor(v) for k, v in ideal.items()}
    order = sorted(ideal, key=lambda k: -(ideal[k] - seats[k]))  # stable: first appearance wins ties
    leftover = quota - sum(seats.values())
    for k in order[:leftover]:
        seats[k] += 1
    deficits: dict[str, int] = {}
    if capacity is None:
        return seats, deficits

    spare = 0
    for k in seats:
        cap = capacity.get(k, 0)
        if seats[k] > cap:
            deficits[k] = seats[k] - cap
            spare += seats[k] - cap
            seats[k] = cap
    while spare:
        open_ = [k for k in order if seats[k] < capacity.get(k, 0)]
        if not open_:
            break
        for k in open_:
            if not spare:
                break
            seats[k] += 1
            spare -= 1
    return seats, deficits


@dataclass
class SplitResult:
    train: list[SegmentPair]
    validation: list[SegmentPair]
    test: list[SegmentPair]
    audit: dict = field(default_factory=dict)

    def audit_json(self) -> str:
        return json.dumps(self.audit, indent=2, sort_keys=True, ensure_ascii=False) + "\n"

    def write(self, out_dir: str | Path) -> None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        write_bitext(out_dir, "train", self.train)
        write_bitext(out_dir, "valid", self.validation)
        write_bitext(out_dir, "test", self.test)
        (out_dir / "audit.json").write_text(self.audit_json(), encoding="utf-8")


def round2_split(pairs: Sequence[SegmentPair], cfg: SplitConfig | None = None, *,
                 prefiltered: bool = False, dedup_eval_vs_train: bool = False) -> SplitResult:
    """Provenance-stratified validation/test selection; the remainder is train.

    Unless ``prefiltered`` is set, the filter battery and the word-count
    outlier filter run first. Then: provenance fractions and mean source
    length over the filtered set, length window, best-first sort, quota per
    provenance, seeded shuffle, and a validation/test cut.
    """
    cfg = cfg or SplitConfig()
    removed = dict.fromkeys(STAGES, 0)
    removed["outlier"] = 0
    removed["eval_overlap"] = 0
    n_input = len(pairs)
    if not prefiltered:
        pairs, stage_counts = filter_battery(pairs, cfg)
        removed.update(stage_counts)
        before = len(pairs)
        pairs = remove_outliers(pairs, cfg)
        removed["outlier"] = before - len(pairs)
    if not pairs:
        raise DataContractError("no pairs left to split after filtering")

    fractions = source_proportions(pairs)
    avg = mean_source_words(pairs)
    lo, hi = window_bounds(avg, cfg)
    in_window = [i for i, p in enumerate(pairs) if lo <= p.source_words <= hi]
    windowed = sorted(in_window, key=lambda i: (-pairs[i].align_score, i))
    capacity: dict[str, int] = {}
    for i in windowed:
        capacity[pairs[i].provenance] = capacity.get(pairs[i].provenance, 0) + 1
    counts: dict[str, int] = {}
    for p in pairs:
        counts[p.provenance] = counts.get(p.provenance, 0) + 1
    shares = {k: Fraction(c, len(pairs)) for k, c in counts.items()}
    quotas, deficits = apportion(shares, cfg.round2_quota, capacity)

    taken = dict.fromkeys(quotas, 0)
    chosen = []
    for i in windowed:
        prov = pairs[i].provenance
        if taken[prov] < quotas[prov]:
            taken[prov] += 1
            chosen.append(i)
    selected = [pairs[i] for i in chosen]

    perm = np.random.default_rng(cfg.seed).permutation(len(selected))
    shuffled = [selected[i] for i in perm]
    if len(shuffled) == cfg.round2_quota:
        n_val = cfg.val_size
    else:
        n_val = len(shuffled) * cfg.val_size // cfg.round2_quota
    validation, test = shuffled[:n_val], shuffled[n_val:]

    chosen_set = set(chosen)
    train = [p for i, p in enumerate(pairs) if i not in chosen_set]
    if dedup_eval_vs_train:
        eval_sources = {normalize(p.source_text) for p in selected}
        kept = [p for p in train if normalize(p.source_text) not in eval_sources]
        removed["eval_overlap"] = len(train) - len(kept)
        train = kept

    audit = {
        "input": n_input,
        "removed": removed,
        "train": len(train),
        "validation": len(validation),
        "test": len(test),
        "avg_source_words": avg,
        "window": [lo, hi],
        "windowed": len(windowed),
        "proportions": fractions,
        "quotas": quotas,
        "shortfall": {"deficits": deficits, "missing": cfg.round2_quota - len(selected)},
        "seed": cfg.seed,
        "config": cfg.as_dict(),
    }
    return SplitResult(train, validation, test, audit)


def worst_k_by_score(pairs: Sequence[SegmentPair], k: int = WORST_K) -> list[SegmentPair]:
    check_positive_int(k, "k")
    return sort_by_score(pairs, descending=False)[:k]


def dual_reference_report(hyps: Mapping[str, Sequence[str]], reference: Sequence[str],
                          postedited: Sequence[str]) -> list[dict]:
    """BLEU and chrF of every system against a reference and its post-edit."""
    check_aligned(postedited, reference, "post-edited lines")
    bleu, chrf = BLEU(), CHRF()
    rows = []
    for name, lines in hyps.items():
        check_aligned(lines, reference, f"hypotheses of {name}")
        rows.append({
            "system": name,
            "reference": {"bleu": bleu.corpus_score(lines, reference),
                          "chrf": chrf.corpus_score(lines, reference)},
            "postedit": {"bleu": bleu.corpus_score(lines, postedited),
                         "chrf": chrf.corpus_score(lines, postedited)},
        })
    return rows


def dual_reference_markdown(rows: Sequence[dict]) -> str:
    out = ["| System | BLEU (ref) | chrF (ref) | BLEU (post-edit) | chrF (post-edit) |",
           "|---|---|---|---|---|"]
    for r in rows:
        out.append("| {} | {} | {} | {} | {} |".format(
            r["system"], r["reference"]["bleu"].formatted(), r["reference"]["chrf"].formatted(),
            r["postedit"]["bleu"].formatted(), r["postedit"]["chrf"].formatted()))
    return "\n".join(out) + "\n"


class BitextFilter(BaseEstimator, TransformerMixin):
    """Filter battery plus word-count outlier removal as a transformer."""

    def __init__(self, min_align_score=SplitConfig.min_align_score, max_words=SplitConfig.max_words,
                 remove_outliers=True):
        self.min_align_score = min_align_score
        self.max_words = max_words
        self.remove_outliers = remove_outliers

    def _cfg(self) -> SplitConfig:
        return SplitConfig(max_words=self.max_words, min_align_score=self.min_align_score)

    def fit(self, X, y=None):
        return self

    def transform(self, X):
        kept, _ = filter_battery(X, self._cfg())
        return remove_outliers(kept, self._cfg()) if self.remove_outliers else kept


class LengthWindow(BaseEstimator, TransformerMixin):
    """Learn the mean source length on one set, keep in-window pairs of another.

    Fitting on training pairs and transforming a candidate pool is the
    round-1 test selection window.
    """

    def __init__(self, ratio_low=SplitConfig.ratio_low, ratio_high=SplitConfig.ratio_high):
        self.ratio_low = ratio_low
        self.ratio_high = ratio_high

    def fit(self, X, y=None):
        self.avg_words_ = mean_source_words(list(X))
        return self

    def transform(self, X):
        check_is_fitted(self, "avg_words_")
        cfg = SplitConfig(ratio_low=self.ratio_low, ratio_high=self.ratio_high)
        return length_window(X, self.avg_words_, cfg)


class StratifiedEvalSplitter(BaseEstimator):
    """Estimator front-end to :func:`round2_split`.

    ``fit`` records the filtered-set statistics (provenance fractions, mean
    source length, quotas); ``split`` produces the SplitResult.
    """

    def __init__(self, quota=SplitConfig.round2_quota, val_size=SplitConfig.val_size,
                 test_size=SplitConfig.test_size, ratio_low=SplitConfig.ratio_low,
                 ratio_high=SplitConfig.ratio_high, min_align_score=SplitConfig.min_align_score,
                 max_words=SplitConfig.max_words, seed=0, dedup_eval_vs_train=False):
        self.quota = quota
        self.val_size = val_size
        self.test_size = test_size
        self.ratio_low = ratio_low
        self.ratio_high = ratio_high
        self.min_align_score = min_align_score
        self.max_words = max_words
        self.seed = seed
        self.dedup_eval_vs_train = dedup_eval_vs_train

    def config(self) -> SplitConfig:
        return SplitConfig(max_words=self.max_words, min_align_score=self.min_align_score,
                           ratio_low=self.ratio_low, ratio_high=self.ratio_high,
                           round2_quota=self.quota, val_size=self.val_size,
                           test_size=self.test_size, seed=self.seed)

    def fit(self, X, y=None):
        self.result_ = round2_split(list(X), self.config(),
                                    dedup_eval_vs_train=self.dedup_eval_vs_train)
        audit = self.result_.audit
        self.proportions_ = audit["proportions"]
        self.avg_words_ = audit["avg_source_words"]
        self.quotas_ = audit["quotas"]
        return self

    def split(self, X=None) -> SplitResult:
        if X is not None:
            self.fit(X)
        check_is_fitted(self, "result_")
        return self.result_
