"""Translation edit rate with block shifts.

Edits are word-level insertions, deletions, substitutions and block shifts,
each costing 1, normalised by the reference length. Long hypotheses use the
usual greedy shift search; short ones are searched exactly, since the greedy
search cannot find optima that need a zero-gain shift first.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np
from rapidfuzz.distance import Levenshtein

from ..text import normalize, tokenize_words
from .base import CorpusMetric

MAX_BLOCK_LEN = 10
MAX_SHIFT_DIST = 50
EXACT_MAX_LEN = 6


@dataclass(frozen=True)
class TerResult:
    edits: int
    ref_len: int
    shifts: int = 0

    @property
    def score(self) -> float:
        return self.edits / self.ref_len

    @property
    def percent(self) -> float:
        return 100.0 * self.score


def word_edit_distance(a: Sequence[str], b: Sequence[str]) -> int:
    return Levenshtein.distance(list(a), list(b))


def _ref_blocks(ref: Sequence[str], max_len: int) -> set[tuple[str, ...]]:
    return {tuple(ref[i:i + n]) for n in range(1, max_len + 1) for i in range(len(ref) - n + 1)}


def _moves(seq: tuple, max_len: int, max_dist: int,
           allowed: set | None = None) -> Iterator[tuple[tuple[int, int, int, int], tuple]]:
    """Every single block move of ``seq``, keyed by (distance, start, length, target)."""
    n = len(seq)
    for i in range(n):
        for length in range(1, min(max_len, n - i) + 1):
            block = seq[i:i + length]
            if allowed is not None and block not in allowed:
                continue
            rest = seq[:i] + seq[i + length:]
            lo, hi = max(0, i - max_dist), min(len(rest), i + max_dist)
            for j in range(lo, hi + 1):
                if j != i:
                    yield (abs(j - i), i, length, j), rest[:j] + block + rest[j:]


def greedy_shift(hyp: Sequence[str], ref: Sequence[str], max_len: int = MAX_BLOCK_LEN,
                 max_dist: int = MAX_SHIFT_DIST) -> tuple[tuple[str, ...], int]:
    """Apply the best reference-matching block shift until none pays for itself.

    A shift is taken only when it lowers the edit distance by more than its
    own unit cost. Ties go to the shortest move, then the leftmost block,
    then the shortest block, then the leftmost target.
    """
    cur = tuple(hyp)
    ref = list(ref)
    allowed = _ref_blocks(ref, max_len)
    dist = word_edit_distance(cur, ref)
    shifts = 0
    while dist > 1:
        best_key, best_seq, best_dist = None, None, dist
        for key, cand in _moves(cur, max_len, max_dist, allowed):
            d = word_edit_distance(cand, ref)
            k = (d,) + key
            if best_key is None or k < best_key:
                best_key, best_seq, best_dist = k, cand, d
        if best_seq is None or dist - best_dist <= 1:
            break
        cur, dist = best_seq, best_dist
        shifts += 1
    return cur, shifts


def exact_shift_edits(hyp: Sequence[str], ref: Sequence[str]) -> tuple[int, int]:
    """Minimum shifts + edit distance over unconstrained block moves.

    Breadth-first over arrangements, stopping once the depth alone reaches
    the best total. Only practical for a handful of tokens.
    """
    ref = list(ref)
    start = tuple(hyp)
    best, best_shifts = word_edit_distance(start, ref), 0
    seen = {start}
    frontier = [start]
    depth = 0
    n = len(start)
    while frontier and depth + 1 < best:
        depth += 1
        nxt = []
        for seq in frontier:
            for _, cand in _moves(seq, n, n):
                if cand in seen:
                    continue
                seen.add(cand)
                nxt.append(cand)
                total = depth + word_edit_distance(cand, ref)
                if total < best:
                    best, best_shifts = total, depth
        frontier = nxt
    return best, best_shifts


def ter_edits(hyp: Sequence[str], ref: Sequence[str], exact_max_len: int = EXACT_MAX_LEN,
              max_len: int = MAX_BLOCK_LEN, max_dist: int = MAX_SHIFT_DIST) -> tuple[int, int]:
    """(total edits, shifts) for one hypothesis/reference token pair."""
    if len(hyp) <= exact_max_len:
        return exact_shift_edits(hyp, ref)
    shifted, shifts = greedy_shift(hyp, ref, max_len, max_dist)
    return shifts + word_edit_distance(shifted, ref), shifts


def ter(hyp: Sequence[str], ref: Sequence[str], exact_max_len: int = EXACT_MAX_LEN) -> TerResult:
    if not ref:
        raise ValueError("TER needs a non-empty reference")
    edits, shifts = ter_edits(hyp, ref, exact_max_len)
    return TerResult(edits, len(ref), shifts)


def hter(hyp: Sequence[str], postedit: Sequence[str],
         exact_max_len: int = EXACT_MAX_LEN) -> TerResult:
    """TER against a human post-edit of ``hyp``."""
    if not postedit:
        raise ValueError("hTER needs a non-empty post-edited reference")
    return ter(hyp, postedit, exact_max_len)


class TER(CorpusMetric):
    """Corpus TER (0-100, lower is better): total edits over total reference words.

    Set ``postedited=True`` to label the score as hTER.
    """

    higher_is_better = False

    def __init__(self, lowercase=False, exact_max_len=EXACT_MAX_LEN, max_block_len=MAX_BLOCK_LEN,
                 max_shift_dist=MAX_SHIFT_DIST, postedited=False):
        self.lowercase = lowercase
        self.exact_max_len = exact_max_len
        self.max_block_len = max_block_len
        self.max_shift_dist = max_shift_dist
        self.postedited = postedited

    @property
    def metric_id(self):
        return "hter" if self.postedited else "ter"

    def segment_stats(self, hyp: str, ref: str) -> np.ndarray:
        h = tokenize_words(normalize(hyp), self.lowercase)
        r = tokenize_words(normalize(ref), self.lowercase)
        if not r:
            # an empty reference line contributes insertions only
            return np.array([len(h), 0], dtype=np.int64)
        edits, _ = ter_edits(h, r, self.exact_max_len, self.max_block_len, self.max_shift_dist)
        return np.array([edits, len(r)], dtype=np.int64)

    def aggregate(self, totals: np.ndarray) -> np.ndarray:
        totals = np.asarray(totals, dtype=np.float64)
        edits, ref_len = totals[..., 0], totals[..., 1]
        if np.any(ref_len <= 0):
            raise ValueError("TER is undefined for an empty reference corpus")
        return 100.0 * edits / ref_len

