"""Paired approximate randomization tests and significance clustering."""

from __future__ import annotations

import csv
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np

from .config import ALPHA as DEFAULT_ALPHA
from .config import ART_REPETITIONS as DEFAULT_REPETITIONS
from .validation import check_positive_int, check_seed

MAX_EXACT_SEGMENTS = 20
CHUNK_SIZE = 1024
# resampled deltas within this distance of the observed one count as ties
TIE_EPS = 1e-9

SIGNIFICANCE_COLUMNS = ("system_a", "system_b", "metric", "observed_delta", "p_value",
                        "repetitions", "seed")


@dataclass(frozen=True)
class PairedSystemStats:
    """Per-segment sufficient statistics of two systems on one test set."""

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a, b = np.asarray(self.a), np.asarray(self.b)
        if a.ndim == 1:
            a, b = a[:, None], b[:, None]
        if a.shape != b.shape:
            raise ValueError(f"paired statistics differ in shape: {a.shape} vs {b.shape}")
        if a.ndim != 2 or a.shape[0] == 0:
            raise ValueError("paired statistics must be a non-empty (segments, features) array")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    def __len__(self):
        return self.a.shape[0]

    @classmethod
    def from_texts(cls, metric, hyps_a, hyps_b, refs) -> "PairedSystemStats":
        return cls(metric.corpus_stats(hyps_a, refs), metric.corpus_stats(hyps_b, refs))


@dataclass(frozen=True)
class SignificanceResult:
    p_value: float
    observed_delta: float
    repetitions: int
    seed: int | None

    def significant(self, alpha: float = DEFAULT_ALPHA) -> bool:
        return self.p_value < alpha


def _aggregate_fn(aggregator) -> Callable[[np.ndarray], np.ndarray]:
    return getattr(aggregator, "aggregate", aggregator)


def _observed(paired: PairedSystemStats, agg) -> float:
    return float(agg(paired.a.sum(axis=0))) - float(agg(paired.b.sum(axis=0)))


def swap_masks(seed: int, start: int, stop: int, n_segments: int) -> np.ndarray:
    """Swap decisions for repetitions ``start..stop-1``, one row per repetition.

    Each repetition owns a fixed slice of a Philox counter stream keyed by
    ``seed``, so the bits for repetition r never depend on how the
    repetitions are chunked or scheduled.
    """
    words = -(-n_segments // 64)
    blocks = -(-words // 4)
    gen = np.random.Philox(key=seed, counter=start * blocks)
    raw = gen.random_raw((stop - start) * blocks * 4).astype("<u8")
    raw = raw.reshape(stop - start, blocks * 4)
    bits = np.unpackbits(raw.view(np.uint8), axis=1, bitorder="little")
    return bits[:, :n_segments].astype(bool)


def _count_chunk(paired, agg, seed, start, stop, threshold) -> int:
    masks = swap_masks(seed, start, stop, len(paired))
    diff = paired.b - paired.a
    # einsum without BLAS keeps float sums independent of thread scheduling
    moved = np.einsum("rn,nd->rd", masks.astype(diff.dtype), diff, optimize=False)
    tot_a = paired.a.sum(axis=0)
    tot_b = paired.b.sum(axis=0)
    deltas = agg(tot_a + moved) - agg(tot_b - moved)
    return int(np.count_nonzero(np.abs(deltas) >= threshold))


def art_pvalue(paired: PairedSystemStats, aggregator, repetitions: int = DEFAULT_REPETITIONS,
               seed: int = 0, n_jobs: int = 1) -> SignificanceResult:
    """Two-sided approximate randomization test on the corpus-level delta.

    Every repetition swaps each segment's A/B statistics with probability
    1/2 and re-aggregates. ``p = (hits + 1) / (repetitions + 1)``.
    """
    check_positive_int(repetitions, "repetitions")
    check_seed(seed)
    agg = _aggregate_fn(aggregator)
    observed = _observed(paired, agg)
    threshold = abs(observed) - TIE_EPS
    bounds = [(s, min(s + CHUNK_SIZE, repetitions)) for s in range(0, repetitions, CHUNK_SIZE)]

    def work(b):
        return _count_chunk(paired, agg, seed, b[0], b[1], threshold)

    if n_jobs > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            hits = sum(pool.map(work, bounds))
    else:
        hits = sum(map(work, bounds))
    return SignificanceResult((hits + 1) / (repetitions + 1), observed, repetitions, seed)


def exact_randomization_pvalue(paired: PairedSystemStats, aggregator) -> SignificanceResult:
    """Exact permutation p-value over all 2**n swap assignments (n <= 20)."""
    n = len(paired)
    if n > MAX_EXACT_SEGMENTS:
        raise ValueError(f"exact enumeration limited to {MAX_EXACT_SEGMENTS} segments, got {n}")
    agg = _aggregate_fn(aggregator)
    observed = _observed(paired, agg)
    threshold = abs(observed) - TIE_EPS
    total = 1 << n
    shifts = np.arange(n, dtype=np.int64)
    hits = 0
    for start in range(0, total, 1 << 14):
        codes = np.arange(start, min(start + (1 << 14), total), dtype=np.int64)
        swapped = ((codes[:, None] >> shifts) & 1).astype(bool)[:, :, None]
        sum_a = np.where(swapped, paired.b[None], paired.a[None]).sum(axis=1)
        sum_b = np.where(swapped, paired.a[None], paired.b[None]).sum(axis=1)
        hits += int(np.count_nonzero(np.abs(agg(sum_a) - agg(sum_b)) >= threshold))
    return SignificanceResult(hits / total, observed, total, None)


@dataclass
class Cluster:
    rank: int | None
    members: list[Any] = field(default_factory=list)


@dataclass
class ClusterRanking:
    clusters: list[Cluster]

    def __iter__(self):
        return iter(self.clusters)

    def __len__(self):
        return len(self.clusters)

    @property
    def members(self) -> list[Any]:
        return [m for c in self.clusters for m in c.members]

    def sizes(self) -> tuple[int, ...]:
        return tuple(len(c.members) for c in self.clusters)

    def cluster_index(self) -> list[int]:
        """1-based cluster number of every member, in ranking order."""
        return [i for i, c in enumerate(self.clusters, 1) for _ in c.members]


def cluster_rank(systems: Sequence[Any], significant: Callable[[Any, Any], bool], *,
                 key: Callable[[Any], float] | None = None, higher_is_better: bool = True,
                 unranked: Callable[[Any], bool] | None = None, n_jobs: int = 1) -> ClusterRanking:
    """Group an ordered system list into significance clusters.

    Each system joins the cluster of the one before it unless
    ``significant(previous, system)`` holds. Clusters made only of
    ``unranked`` systems get no rank and do not consume a rank number.
    If ``key`` is given the input must already be sorted by it in the
    metric's direction.
    """
    systems = list(systems)
    if not systems:
        raise ValueError("cannot rank an empty system list")
    if key is not None:
        vals = [key(s) for s in systems]
        pairs = zip(vals, vals[1:])
        ok = all(a >= b for a, b in pairs) if higher_is_better else all(a <= b for a, b in pairs)
        if not ok:
            raise ValueError("systems are not sorted by the primary metric")

    adjacent = list(zip(systems, systems[1:]))
    if n_jobs > 1 and len(adjacent) > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            splits = list(pool.map(lambda p: bool(significant(*p)), adjacent))
    else:
        splits = [bool(significant(a, b)) for a, b in adjacent]

    groups = [[systems[0]]]
    for system, split in zip(systems[1:], splits):
        if split:
            groups.append([system])
        else:
            groups[-1].append(system)

    clusters, rank = [], 0
    for members in groups:
        if unranked is not None and all(unranked(m) for m in members):
            clusters.append(Cluster(None, members))
        else:
            rank += 1
            clusters.append(Cluster(rank, members))
    return ClusterRanking(clusters)


def all_pairs_audit(ranking: ClusterRanking, significant: Callable[[Any, Any], bool]) -> list[dict]:
    """Test every cross-cluster pair; rows with ``significant=False`` contradict
    the reading that a cluster beats everything ranked below it."""
    rows = []
    clusters = ranking.clusters
    for i, upper in enumerate(clusters):
        for lower in clusters[i + 1:]:
            for a in upper.members:
                for b in lower.members:
                    rows.append({"upper": a, "lower": b, "significant": bool(significant(a, b))})
    return rows


def significance_csv(rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=SIGNIFICANCE_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: row[k] for k in SIGNIFICANCE_COLUMNS})
    return buf.getvalue()


def significance_row(name_a: str, name_b: str, metric_id: str,
                     result: SignificanceResult) -> dict:
    return {
        "system_a": name_a,
        "system_b": name_b,
        "metric": metric_id,
        "observed_delta": f"{result.observed_delta:.6f}",
        "p_value": f"{result.p_value:.6f}",
        "repetitions": result.repetitions,
        "seed": result.seed,
    }
