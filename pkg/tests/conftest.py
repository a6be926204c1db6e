from pathlib import Path

import hypothesis
import numpy as np
import pytest

from scfg_ngram.grammar import parse_grammar, to_cnf

from oracles import enumerate_language

hypothesis.settings.register_profile("ci", max_examples=40, deadline=None)
hypothesis.settings.load_profile("ci")

GRAMMARS = Path(__file__).resolve().parent.parent / "grammars"

TOY_TEXT = (GRAMMARS / "toy.cfg").read_text()

# finite language exercising long right-hand sides, mixed terminals and unit chains
MIXED_TEXT = """\
S -> NP VP [0.7]
S -> VP [0.2]
S -> please VP now [0.1]
NP -> Det Adj N [0.3]
NP -> Name [0.5]
NP -> N [0.2]
Name -> kim [0.6]
Name -> N [0.4]
Det -> the [1.0]
Adj -> big [0.5]
Adj -> red [0.5]
N -> dog [0.7]
N -> cat [0.3]
VP -> V [0.5]
VP -> V NP [0.3]
VP -> V and V [0.2]
V -> runs [0.6]
V -> sees [0.4]
"""


def binary_x_text(p: float) -> str:
    return f"S -> x [{p!r}]\nS -> S S [{1.0 - p!r}]\n"


@pytest.fixture(scope="session")
def toy():
    return parse_grammar(TOY_TEXT)


@pytest.fixture(scope="session")
def toy_cnf(toy):
    return to_cnf(toy)


@pytest.fixture(scope="session")
def toy_dist(toy):
    return enumerate_language(toy)


@pytest.fixture(scope="session")
def mixed():
    return parse_grammar(MIXED_TEXT)


@pytest.fixture(scope="session")
def mixed_dist(mixed):
    return enumerate_language(mixed)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, repeated in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
