from .base import SCALE_1, SCALE_100, CorpusMetric, MetricScore, format_score
from .beer import BEER, FEATURE_NAMES, BeerModel, beer, beer_features
from .bleu import BLEU, BleuStats, bleu_segment_stats, brevity_penalty, corpus_bleu
from .chrf import CHRF, chrf
from .ter import TER, TerResult, hter, ter, word_edit_distance

METRIC_IDS = ("bleu", "chrf", "ter", "beer", "hter")


def get_metric(name: str, *, max_order=None, chrf_beta=None, beer_model=None,
               lowercase=False) -> CorpusMetric:
    """Build a corpus metric by id with optional overrides."""
    name = name.lower()
    if name == "bleu":
        return BLEU(max_order=max_order or 4, lowercase=lowercase)
    if name == "chrf":
        beta = 2.0 if chrf_beta is None else chrf_beta
        return CHRF(beta=beta, lowercase=lowercase)
    if name in ("ter", "hter"):
        return TER(lowercase=lowercase, postedited=name == "hter")
    if name == "beer":
        return BEER(model=beer_model)
    raise ValueError(f"unknown metric {name!r}; choose from {', '.join(METRIC_IDS)}")


__all__ = [
    "BEER", "BLEU", "CHRF", "TER", "BeerModel", "BleuStats", "CorpusMetric", "FEATURE_NAMES",
    "METRIC_IDS", "MetricScore", "SCALE_1", "SCALE_100", "TerResult", "beer", "beer_features",
    "bleu_segment_stats", "brevity_penalty", "chrf", "corpus_bleu", "format_score",
    "get_metric", "hter", "ter", "word_edit_distance",
]
