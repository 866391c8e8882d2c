import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mtcampaign.metrics import CHRF, chrf
from oracles import oracle_chrf

texts = st.text(alphabet="ab c", min_size=1, max_size=10).filter(lambda s: s.strip())


def test_identity():
    assert chrf("hello world", "hello world").value == 1.0


def test_disjoint():
    assert chrf("aaaa", "bbbb").value == 0.0


def test_small_bigram_case():
    # unigrams: 3 of 4 match both ways (F=3/4); bigrams: 2 of 3 (F=2/3)
    assert chrf("abcd", "abce", max_order=2, beta=1).value == pytest.approx(17 / 24)


def test_empty_reference_rejected():
    with pytest.raises(ValueError):
        chrf("abc", "   ")


def test_reported_on_unit_scale():
    score = chrf("abc", "abd")
    assert score.metric_id == "chrf" and score.reported_scale == "0-1"


@settings(max_examples=200)
@given(texts, texts, st.integers(1, 6), st.sampled_from([1.0, 2.0, 3.0]))
def test_matches_bruteforce_oracle(hyp, ref, order, beta):
    hyp, ref = " ".join(hyp.split()), " ".join(ref.split())
    assert chrf(hyp, ref, order, beta).value == pytest.approx(
        oracle_chrf(hyp, ref, order, beta), abs=1e-9)


@given(texts, texts)
def test_range_and_symmetry(x, y):
    assert 0.0 <= chrf(x, y).value <= 1.0
    # orders missing from the reference are skipped, so symmetry holds at order 1
    v = chrf(x, y, max_order=1, beta=1).value
    assert v == pytest.approx(chrf(y, x, max_order=1, beta=1).value, abs=1e-12)
    assert chrf(x, x).value == 1.0


def test_corpus_pools_counts():
    metric = CHRF()
    single = metric.corpus_score(["abc def"], ["abc deg"]).value
    assert single == pytest.approx(chrf("abc def", "abc deg").value)
    pooled = metric.corpus_score(["ab", "cd"], ["ab", "ce"]).value
    assert 0 < pooled < 1


def test_case_folding_toggle():
    assert chrf("ABC", "abc").value == 0.0
    assert CHRF(lowercase=True).sentence_score("ABC", "abc").value == 1.0
