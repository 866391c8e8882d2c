"""Acceptance suite: each test carries a ``criterion`` marker and the
terminal summary prints one PASS/FAIL line per criterion."""

import json
import random
import time

import numpy as np
import pytest

from campaign_fixture import write_fixture
from conftest import DATA, random_text
from mtcampaign import config
from mtcampaign.campaign import (emit_ranking, evaluate_all, ingest_submissions, load_baselines,
                                 load_references)
from mtcampaign.cli import main
from mtcampaign.metrics import BEER, BLEU, CHRF, TER, bleu_segment_stats, chrf, corpus_bleu, hter, ter
from mtcampaign.pipeline import read_pairs_tsv
from mtcampaign.significance import (PairedSystemStats, art_pvalue, cluster_rank,
                                     exact_randomization_pvalue)
from oracles import oracle_chrf, oracle_corpus_bleu, oracle_exact_pvalue, oracle_ter_edits

pytestmark = pytest.mark.acceptance


def _timed(budget):
    start = time.perf_counter()
    return lambda: time.perf_counter() - start <= budget


# criterion 1: metric oracle suite

@pytest.mark.criterion(1)
def test_ter_matches_exhaustive_oracle():
    within = _timed(60)
    rnd = random.Random(101)
    mismatches = []
    for _ in range(250):
        hyp = [rnd.choice("abcd") for _ in range(rnd.randint(0, 6))]
        ref = [rnd.choice("abcd") for _ in range(rnd.randint(1, 6))]
        if ter(hyp, ref).edits != oracle_ter_edits(hyp, ref):
            mismatches.append((hyp, ref))
    assert mismatches == []
    assert within()


@pytest.mark.criterion(1)
def test_bleu_and_chrf_match_counting_oracles():
    within = _timed(60)
    rnd = random.Random(102)
    vocab = "the a cat dog sat ran on in mat park".split()
    for _ in range(60):
        pairs = []
        for _ in range(rnd.randint(1, 6)):
            hyp = [rnd.choice(vocab) for _ in range(rnd.randint(0, 12))]
            ref = [rnd.choice(vocab) for _ in range(rnd.randint(1, 12))]
            pairs.append((hyp, ref))
        stats = [bleu_segment_stats(h, r) for h, r in pairs]
        assert abs(corpus_bleu(stats).value - oracle_corpus_bleu(pairs)) <= 1e-9
    for _ in range(60):
        hyp = " ".join(rnd.choice(vocab) for _ in range(rnd.randint(1, 6)))
        ref = " ".join(rnd.choice(vocab) for _ in range(rnd.randint(1, 6)))
        order = rnd.randint(1, 6)
        assert abs(chrf(hyp, ref, order).value - oracle_chrf(hyp, ref, order)) <= 1e-9
    assert within()


# criterion 2: identity properties

@pytest.mark.criterion(2)
def test_identity_properties():
    within = _timed(5)
    rnd = random.Random(103)
    bleu, chrf_m, ter_m, hter_m, beer = BLEU(), CHRF(), TER(), TER(postedited=True), BEER()
    for _ in range(100):
        text = random_text(rnd)
        assert bleu.sentence_score(text, text).value == 100.0
        assert chrf_m.sentence_score(text, text).value == 1.0
        assert ter_m.sentence_score(text, text).value == 0.0
        assert hter_m.sentence_score(text, text).value == 0.0
        assert beer.sentence_score(text, text).value == 100.0
        tokens = text.split()
        assert ter(tokens, tokens).score == 0.0 and hter(tokens, tokens).score == 0.0
    assert within()


# criterion 3: ART convergence to the exact test

def _mean_of_ratio(totals):
    totals = np.asarray(totals, dtype=float)
    return totals[..., 0] / totals[..., 1]


def _fixtures():
    rnd = random.Random(104)
    gen = np.random.default_rng(104)
    vocab = "one two three four five six".split()
    bleu = BLEU(max_order=2)
    out = []
    for i in range(12):
        n = 2 + i % 9
        refs = [" ".join(rnd.choice(vocab) for _ in range(6)) for _ in range(n)]
        a = [" ".join(rnd.choice(vocab) for _ in range(6)) for _ in range(n)]
        b = [" ".join(rnd.choice(vocab) for _ in range(5)) for _ in range(n)]
        out.append((PairedSystemStats.from_texts(bleu, a, b, refs), bleu))
    for i in range(12):
        n = 2 + i % 9
        a = np.column_stack([gen.integers(0, 10, n), gen.integers(5, 12, n)]).astype(float)
        b = np.column_stack([gen.integers(0, 10, n), gen.integers(5, 12, n)]).astype(float)
        out.append((PairedSystemStats(a, b), _mean_of_ratio))
    return out


@pytest.mark.criterion(3)
def test_art_converges_to_exact():
    within = _timed(120)
    fixtures = _fixtures()
    assert len(fixtures) >= 20
    for paired, agg in fixtures:
        assert len(paired) <= 10
        exact = exact_randomization_pvalue(paired, agg).p_value
        for seed in (1, 2, 3):
            approx = art_pvalue(paired, agg, 10_000, seed=seed).p_value
            assert abs(approx - exact) <= 0.02, (exact, approx, seed)
    assert within()


@pytest.mark.criterion(3)
def test_exact_test_matches_enumeration_oracle():
    for paired, agg in _fixtures()[:10]:
        fn = getattr(agg, "aggregate", agg)
        expected = oracle_exact_pvalue(paired.a.tolist(), paired.b.tolist(),
                                       lambda t: float(fn(np.asarray(t))))
        assert exact_randomization_pvalue(paired, agg).p_value == pytest.approx(expected)


@pytest.mark.criterion(3)
def test_identical_systems_exactly_one():
    rnd = random.Random(105)
    refs = [random_text(rnd) for _ in range(8)]
    hyps = [random_text(rnd) for _ in range(8)]
    paired = PairedSystemStats.from_texts(BLEU(), hyps, hyps, refs)
    assert art_pvalue(paired, BLEU(), 10_000, seed=9).p_value == 1.0
    assert exact_randomization_pvalue(paired, BLEU()).p_value == 1.0


# criterion 4: determinism

def _run_rank(tmp_path, tag, subs, refs, manifest):
    out = {}
    for fmt in ("markdown", "csv"):
        path = tmp_path / f"{tag}.{fmt}"
        report = tmp_path / f"{tag}.{fmt}.json"
        assert main(["rank", "--submissions", str(subs), "--refs", str(refs), "--baselines",
                     str(manifest), "--metrics", "bleu,chrf,ter,beer", "--seed", "11",
                     "--format", fmt, "--output", str(path), "--report-json", str(report)]) == 0
        out[fmt] = (path.read_bytes(), report.read_bytes())
    return out


@pytest.mark.criterion(4)
def test_rank_byte_identical(tmp_path):
    subs, refs, manifest = write_fixture(tmp_path / "fx")
    assert _run_rank(tmp_path, "a", subs, refs, manifest) == _run_rank(
        tmp_path, "b", subs, refs, manifest)


@pytest.mark.criterion(4)
def test_split_byte_identical(tmp_path):
    tsv = tmp_path / "in.tsv"
    _write_synthetic_tsv(tsv, 5_000)
    outputs = []
    for tag in ("a", "b"):
        out = tmp_path / tag
        assert main(["split", "--input", str(tsv), "--quota", "400", "--val-size", "200",
                     "--test-size", "200", "--seed", "5", "--out", str(out)]) == 0
        outputs.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
    assert outputs[0] == outputs[1]
    assert len(outputs[0]) == 7


@pytest.mark.criterion(4)
def test_art_identical_across_parallelism():
    rnd = random.Random(106)
    refs = [random_text(rnd, 4) for _ in range(300)]
    a = [random_text(rnd, 4) for _ in range(300)]
    b = [r if i % 3 else random_text(rnd, 4) for i, r in enumerate(refs)]
    bleu = BLEU()
    paired = PairedSystemStats.from_texts(bleu, a, b, refs)
    results = {jobs: art_pvalue(paired, bleu, 10_000, seed=77, n_jobs=jobs) for jobs in (1, 4, 8)}
    assert results[1] == results[4] == results[8]
    chrf_m = CHRF()
    paired = PairedSystemStats.from_texts(chrf_m, a, b, refs)
    assert len({art_pvalue(paired, chrf_m, 3_000, seed=1, n_jobs=j) for j in (1, 4, 8)}) == 1


# criterion 5: clustering

@pytest.mark.criterion(5)
def test_cluster_extremes_and_mixed(tmp_path):
    systems = ["s1", "s2", "s3", "s4"]
    assert cluster_rank(systems, lambda a, b: True).sizes() == (1, 1, 1, 1)
    assert cluster_rank(systems, lambda a, b: False).sizes() == (4,)
    mixed = cluster_rank(["s1", "s2", "s3"], lambda a, b: a == "s1")
    assert [c.members for c in mixed] == [["s1"], ["s2", "s3"]]
    assert [c.rank for c in mixed] == [1, 2]

    subs_dir, refs_dir, _ = write_fixture(tmp_path, ["AlphaMT.transformer", "BetaNMT.rnn-ens",
                                                     "GammaTr.big"])
    refs = load_references(refs_dir)
    subs, _ = ingest_submissions(subs_dir, refs)
    (table,) = evaluate_all(subs, refs, ["bleu"], seed=0).tables
    assert table.ranking.sizes() == (1, 2)


@pytest.mark.criterion(5)
def test_cluster_partition_preserves_order():
    rnd = random.Random(107)
    for _ in range(1000):
        n = rnd.randint(1, 12)
        scores = sorted((rnd.random() for _ in range(n)), reverse=True)
        systems = [(f"sys{i}", s) for i, s in enumerate(scores)]
        cut = {s[0] for s in systems if rnd.random() < 0.4}
        ranking = cluster_rank(systems, lambda a, b: b[0] in cut, key=lambda s: s[1])
        assert ranking.members == systems
        ranks = [c.rank for c in ranking]
        assert ranks == list(range(1, len(ranks) + 1))
        for c in ranking:
            assert all(m[0] not in cut for m in c.members[1:])


# criterion 6: pipeline end to end

def _write_synthetic_tsv(path, n_pairs, seed=0):
    """Blocks of ten pairs, provenance 5/3/2. Noise is applied to whole blocks
    so the filtered set keeps the 0.5/0.3/0.2 split exactly."""
    rng = np.random.default_rng(seed)
    provs = ["web"] * 5 + ["news"] * 3 + ["gov"] * 2
    lengths = rng.integers(3, 31, size=n_pairs)
    scores = rng.uniform(1.04, 2.0, size=n_pairs)
    lines = []
    for blk in range(n_pairs // 10):
        kind = blk % 25
        for j in range(10):
            i = blk * 10 + j
            if kind == 3 and blk >= 4:
                i -= 40  # exact copy of a plain block
            elif kind == 9:
                i -= 70  # recased, repunctuated copy of a plain block
            n = int(lengths[i]) if kind != 5 else 101
            src = " ".join(f"s{i}x{k}" for k in range(n))
            tgt = src if kind == 7 else " ".join(f"t{i}x{k}" for k in range(n))
            if kind == 9:
                src, tgt = src.upper() + " !", tgt + " ."
            score = 1.0 if kind == 1 else float(scores[i])
            lines.append(f"{src}\t{tgt}\t{score!r}\t{provs[j]}\n")
    with open(path, "w", encoding="utf-8") as fh:
        fh.writelines(lines)


@pytest.mark.criterion(6)
def test_round2_end_to_end(tmp_path):
    tsv = tmp_path / "bitext.tsv"
    _write_synthetic_tsv(tsv, 100_000)
    out = tmp_path / "split"
    start = time.perf_counter()
    assert main(["split", "--input", str(tsv), "--seed", "2024", "--out", str(out)]) == 0
    elapsed = time.perf_counter() - start
    assert elapsed < 10, f"split took {elapsed:.1f}s"

    audit = json.loads((out / "audit.json").read_text(encoding="utf-8"))
    assert audit["validation"] == audit["test"] == 4000
    removed = audit["removed"]
    assert removed["below_threshold"] > 0 and removed["duplicate"] > 0
    assert removed["identical"] > 0 and removed["outlier"] > 0
    assert removed["near_duplicate"] > 0
    assert sum(removed.values()) + audit["train"] + audit["validation"] + audit["test"] == 100_000

    pairs = {(p.source_text, p.target_text): p for p in read_pairs_tsv(tsv)}
    lo, hi = audit["window"]
    counts = {}
    for name in ("valid", "test"):
        src = (out / f"{name}.src").read_text(encoding="utf-8").splitlines()
        tgt = (out / f"{name}.tgt").read_text(encoding="utf-8").splitlines()
        assert len(src) == len(tgt) == 4000
        for s, t in zip(src, tgt):
            p = pairs[(s, t)]
            assert p.align_score >= 1.04
            assert p.source_words <= 100 and p.target_words <= 100
            assert lo <= p.source_words <= hi
            counts[p.provenance] = counts.get(p.provenance, 0) + 1
    for prov, frac in (("web", 0.5), ("news", 0.3), ("gov", 0.2)):
        assert abs(counts[prov] - 8000 * frac) <= 3


# criterion 7: literal constants

@pytest.mark.criterion(7)
def test_literal_constants():
    assert config.MIN_ALIGN_SCORE == 1.04
    assert config.MAX_WORDS == 100
    assert (config.RATIO_LOW, config.RATIO_HIGH) == (0.7, 1.3)
    assert config.ROUND2_QUOTA == 8000
    assert (config.VAL_SIZE, config.TEST_SIZE) == (4000, 4000)
    assert config.ROUND1_TEST_SIZE == 2000
    assert (config.ART_REPETITIONS, config.ALPHA) == (10_000, 0.05)
    assert config.WORST_K == 500


# criterion 8: hTER workflow

@pytest.mark.criterion(8)
def test_hter_ten_percent_substitutions():
    rnd = random.Random(108)
    vocab = [f"word{i}" for i in range(300)]
    post = [[rnd.choice(vocab) for _ in range(rnd.randint(5, 20))] for _ in range(1000)]
    positions = [(s, w) for s, seg in enumerate(post) for w in range(len(seg))]
    total = len(positions)
    n_subs = total // 10
    hyps = [list(seg) for seg in post]
    for k, (s, w) in enumerate(rnd.sample(positions, n_subs)):
        hyps[s][w] = f"sub{k}"
    metric = TER(postedited=True)
    score = metric.corpus_score([" ".join(h) for h in hyps], [" ".join(p) for p in post])
    assert score.metric_id == "hter"
    assert abs(score.value - 100 * n_subs / total) < 1e-9
    assert abs(score.value - 10.0) <= 0.01


# criterion 9: table rendering

@pytest.mark.criterion(9)
def test_golden_tables(tmp_path):
    subs_dir, refs_dir, manifest = write_fixture(tmp_path)
    refs = load_references(refs_dir)
    subs, _ = ingest_submissions(subs_dir, refs, load_baselines(manifest))
    report = evaluate_all(subs, refs, ["bleu", "chrf", "ter"], seed=0)
    md = emit_ranking(report, "markdown")
    assert md == (DATA / "ranking_mixed.md").read_text(encoding="utf-8")
    assert emit_ranking(report, "csv") == (DATA / "ranking_mixed.csv").read_text(encoding="utf-8")
    lines = md.splitlines()
    assert lines[2].startswith("| Rank | Team | Description | BLEU [↑] | chrF [↑] | TER [↓]")
    body = lines[4:]
    assert sum(ln.startswith("|---") for ln in body) == 2
    assert body[1].startswith("|---") and body[0].startswith("| 1 |")
    assert body[-1].startswith("| - | Baseline |")
