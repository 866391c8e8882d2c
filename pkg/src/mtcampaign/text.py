"""Text normalization, tokenization and n-gram counting.

One tokenizer is used everywhere in the package so that every metric and
every corpus filter sees the same word boundaries.
"""

from __future__ import annotations

import re
import sys
import unicodedata
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Sequence

_LINE_BREAKS = ("\n", "\r", "\x0b", "\x0c", "\x1c", "\x1d", "\x1e", "\x85", "\u2028", "\u2029")


@dataclass(frozen=True)
class Segment:
    id: int
    text: str

    def __post_init__(self):
        if any(ch in self.text for ch in _LINE_BREAKS):
            raise ValueError(f"segment {self.id} contains a line break")


@dataclass(frozen=True)
class CorpusStats:
    num_sentences: int
    num_tokens: int
    vocab_size: int

    def as_dict(self) -> dict:
        return {"S": self.num_sentences, "T": self.num_tokens, "V": self.vocab_size}


def is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


@lru_cache(maxsize=None)
def _punct_class(ascii_only: bool = False) -> str:
    top = 127 if ascii_only else sys.maxunicode
    points = [c for c in range(top + 1) if is_punct(chr(c))]
    # contiguous code points collapse to ranges so re builds a compact charset
    runs = [[points[0], points[0]]]
    for c in points[1:]:
        if c == runs[-1][1] + 1:
            runs[-1][1] = c
        else:
            runs.append([c, c])
    return "".join(re.escape(chr(lo)) if lo == hi else f"{re.escape(chr(lo))}-{re.escape(chr(hi))}"
                   for lo, hi in runs)


@lru_cache(maxsize=None)
def _token_re(ascii_only: bool = False) -> re.Pattern:
    p = _punct_class(ascii_only)
    return re.compile(f"[{p}]+|[^\\s{p}]+")


@lru_cache(maxsize=None)
def _punct_re(ascii_only: bool = False) -> re.Pattern:
    return re.compile(f"[{_punct_class(ascii_only)}]+")


def strip_punct(text: str) -> str:
    # the ASCII-only pattern is several times faster and exact on ASCII input
    return _punct_re(text.isascii()).sub("", text)


def normalize(text: str) -> str:
    """NFC-compose ``text``, strip it and collapse internal whitespace runs."""
    # str.split() and re's \s agree on every code point
    return " ".join(unicodedata.normalize("NFC", text).split())


def tokenize_words(text: str, lowercase: bool = False) -> list[str]:
    """Split on whitespace and detach each maximal run of punctuation.

    >>> tokenize_words("don't stop")
    ['don', "'", 't', 'stop']
    """
    if lowercase:
        text = text.lower()
    return _token_re(text.isascii()).findall(text)


def ngrams(seq: Sequence, n: int) -> Counter:
    """Multiset of contiguous length-``n`` subsequences of ``seq``.

    Token lists give tuple keys, strings give substring keys.
    """
    if n < 1:
        raise ValueError("n-gram order must be >= 1")
    if isinstance(seq, str):
        return Counter(seq[i:i + n] for i in range(len(seq) - n + 1))
    return Counter(tuple(seq[i:i + n]) for i in range(len(seq) - n + 1))


def char_ngrams(text: str, n: int) -> Counter:
    # text is expected to be normalized: single internal spaces are kept
    return ngrams(text, n)


def corpus_stats(corpus: Iterable[Segment | str]) -> CorpusStats:
    num_sentences = num_tokens = 0
    vocab = set()
    for seg in corpus:
        text = seg.text if isinstance(seg, Segment) else seg
        tokens = tokenize_words(normalize(text))
        num_sentences += 1
        num_tokens += len(tokens)
        vocab.update(tokens)
    return CorpusStats(num_sentences, num_tokens, len(vocab))


def read_corpus(path: str | Path) -> list[Segment]:
    """Read a UTF-8 plain-text corpus, one segment per line."""
    with open(path, encoding="utf-8", newline="\n") as fh:
        return [Segment(i, line.rstrip("\n").rstrip("\r")) for i, line in enumerate(fh)]


def read_lines(path: str | Path) -> list[str]:
    return [seg.text for seg in read_corpus(path)]


def write_lines(path: str | Path, lines: Iterable[str]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in lines:
            fh.write(line)
            fh.write("\n")


def format_count(value: int) -> str:
    """Human-readable count in the K/M style of corpus statistics tables."""
    if value >= 1_000_000:
        return f"{value / 1_000_000:.1f}M"
    if value >= 1_000:
        return f"{value / 1_000:.1f}K"
    return str(value)
