import random
import string
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

DATA = Path(__file__).parent / "data"

_criteria: dict[str, list[str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(id): acceptance criterion covered by a test")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    for key in report.keywords:
        if key.startswith("AC") and key[2:].isdigit():
            _criteria.setdefault(key, []).append(report.outcome)


def pytest_collection_modifyitems(items):
    for item in items:
        for mark in item.iter_markers("criterion"):
            item.keywords[f"AC{mark.args[0]}"] = True


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_criteria, key=lambda k: int(k[2:])):
        outcomes = _criteria[key]
        status = "PASS" if all(o == "passed" for o in outcomes) else "FAIL"
        terminalreporter.write_line(f"{status} criterion {key[2:]} ({len(outcomes)} checks)")


@pytest.fixture
def rng():
    return random.Random(20240601)


def random_words(rng, n, vocab=None):
    vocab = vocab or [w for w in ("alpha beta gamma delta eps zeta eta theta iota kappa").split()]
    return [rng.choice(vocab) for _ in range(n)]


def random_text(rng, min_words=1, max_words=12):
    words = []
    for _ in range(rng.randint(min_words, max_words)):
        words.append("".join(rng.choice(string.ascii_lowercase) for _ in range(rng.randint(1, 6))))
    return " ".join(words)


@pytest.fixture
def data_dir():
    return DATA
