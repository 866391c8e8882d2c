"""Default thresholds of the evaluation campaign and its corpus pipeline."""

from __future__ import annotations

from dataclasses import asdict, dataclass

MIN_ALIGN_SCORE = 1.04
MAX_WORDS = 100
RATIO_LOW = 0.7
RATIO_HIGH = 1.3
ROUND1_TEST_SIZE = 2000
ROUND2_QUOTA = 8000
VAL_SIZE = 4000
TEST_SIZE = 4000
ART_REPETITIONS = 10_000
ALPHA = 0.05
WORST_K = 500


@dataclass(frozen=True)
class SplitConfig:
    max_words: int = MAX_WORDS
    min_align_score: float = MIN_ALIGN_SCORE
    ratio_low: float = RATIO_LOW
    ratio_high: float = RATIO_HIGH
    round1_test_size: int = ROUND1_TEST_SIZE
    round2_quota: int = ROUND2_QUOTA
    val_size: int = VAL_SIZE
    test_size: int = TEST_SIZE
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.ratio_low < 1 < self.ratio_high:
            raise ValueError("need 0 < ratio_low < 1 < ratio_high")
        sizes = (self.max_words, self.round1_test_size, self.round2_quota,
                 self.val_size, self.test_size)
        if any(s <= 0 for s in sizes):
            raise ValueError("all sizes must be positive")
        if self.val_size + self.test_size != self.round2_quota:
            raise ValueError("val_size + test_size must equal round2_quota")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 bits")

    def as_dict(self) -> dict:
        return asdict(self)
