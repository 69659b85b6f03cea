import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from charmer.classifier import BuiltinOracle, TrainConfig, train_builtin
from charmer.harness import extract_alphabet
from charmer.oracle import cw_loss
from charmer.synth import make_keyword_corpus


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def desk_corpus():
    return make_keyword_corpus(500, seed=0)


@pytest.fixture(scope="session")
def desk_classifier(desk_corpus):
    return train_builtin([(r.text, r.label) for r in desk_corpus], TrainConfig(seed=0))


@pytest.fixture(scope="session")
def desk_oracle(desk_classifier):
    return BuiltinOracle(desk_classifier)


@pytest.fixture(scope="session")
def desk_alphabet(desk_corpus):
    return extract_alphabet(desk_corpus)


@pytest.fixture(scope="session")
def attackable_records(desk_oracle):
    """Held-out samples the desk classifier gets right on clean text."""
    records = make_keyword_corpus(100, seed=7)
    return [
        r
        for r in records
        if cw_loss(desk_oracle.score_batch([r.text])[0], r.label) < 0
    ]
