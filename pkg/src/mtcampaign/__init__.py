"""Machine translation shared-task evaluation and corpus preparation."""

from .config import SplitConfig
from .metrics import BEER, BLEU, CHRF, TER, BeerModel, MetricScore, get_metric
from .pipeline import SegmentPair, round2_split
from .significance import art_pvalue, cluster_rank, exact_randomization_pvalue

__version__ = "0.1.0"

__all__ = [
    "BEER", "BLEU", "CHRF", "TER", "BeerModel", "MetricScore", "SegmentPair", "SplitConfig",
    "art_pvalue", "cluster_rank", "exact_randomization_pvalue", "get_metric", "round2_split",
]
