import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from scfg_ngram.grammar import (
    CnfGrammar,
    GrammarError,
    GrammarSyntaxError,
    Rule,
    parse_grammar,
    renormalize,
    sentence_inside,
    serialize,
    to_cnf,
    validate,
)

from conftest import MIXED_TEXT, binary_x_text
from oracles import enumerate_language


class TestParse:
    def test_toy_counts(self, toy):
        assert len(toy.rules) == 10
        assert set(toy.nonterminals) == {"S", "NP", "VP", "Det", "N", "V"}
        assert set(toy.vocab) == {"the", "a", "book", "close", "open"}
        assert toy.start == "S"

    def test_single_rule(self):
        g = parse_grammar("S -> x [1.0]")
        assert g.vocab == ("x",)
        assert g.rules == (Rule("S", ("x",), 1.0),)

    def test_binary_x_shape(self):
        g = parse_grammar(binary_x_text(0.75))
        assert len(g.rules) == 2
        assert g.nonterminals == ("S",)

    def test_comments_blank_lines_and_start_override(self):
        g = parse_grammar("# header\n\nA -> B [1.0]  # trailing\nB -> b [1.0]\n", start="B")
        assert g.start == "B"
        assert len(g.rules) == 2

    def test_zero_probability_dropped(self):
        g = parse_grammar("S -> x [1.0]\nS -> y [0]\n")
        assert len(g.rules) == 1

    @pytest.mark.parametrize(
        "text, line",
        [
            ("S -> x [1.0]\nS x [1.0]\n", 2),
            ("S -> x\n", 1),
            ("S -> x [abc]\n", 1),
            ("S -> x [1.5]\n", 1),
            ("S -> x [-0.1]\n", 1),
        ],
    )
    def test_syntax_errors(self, text, line):
        with pytest.raises(GrammarSyntaxError) as info:
            parse_grammar(text)
        assert info.value.line == line
        assert info.value.column >= 1

    def test_empty(self):
        with pytest.raises(GrammarError):
            parse_grammar("# nothing\n\n")

    def test_serialize_roundtrip(self, toy, mixed):
        for g in (toy, mixed):
            back = parse_grammar(serialize(g))
            assert sorted(map(str, back.rules)) == sorted(map(str, g.rules))
            assert back.start == g.start


rule_strategy = st.tuples(
    st.sampled_from(["A", "B", "C"]),
    st.lists(st.sampled_from(["A", "B", "x", "y", "z"]), min_size=1, max_size=4),
    st.floats(min_value=1e-6, max_value=1.0),
)


@given(st.lists(rule_strategy, min_size=1, max_size=12))
def test_serialize_parse_identity(rules):
    g = parse_grammar("".join(f"{l} -> {' '.join(r)} [{p!r}]\n" for l, r, p in rules))
    back = parse_grammar(serialize(g))
    key = lambda r: (r.lhs, r.rhs, r.prob)
    assert sorted(back.rules, key=key) == sorted(g.rules, key=key)


class TestValidate:
    def test_toy_clean(self, toy):
        assert validate(toy) == []

    def test_bad_sum(self):
        g = parse_grammar("S -> NP [1.0]\nNP -> a [0.5]\nNP -> b [0.4]\n")
        diags = validate(g)
        assert [(d.code, d.symbol) for d in diags] == [("sum", "NP")]

    def test_epsilon(self):
        g = parse_grammar("S -> A [1.0]\nA -> [0.5]\nA -> a [0.5]\n")
        assert [(d.code, d.symbol) for d in validate(g)] == [("epsilon", "A")]

    def test_renormalize(self):
        g = renormalize(parse_grammar("S -> a [0.3]\nS -> b [0.3]\n"))
        assert validate(g) == []
        assert math.isclose(g.rules[0].prob, 0.5)


class TestCnf:
    def test_toy_unit_elimination(self, toy_cnf):
        probs = {(r.lhs, r.rhs): r.prob for r in toy_cnf.rules}
        assert probs[("NP", ("book",))] == pytest.approx(0.4, abs=1e-15)
        assert probs[("VP", ("open",))] == pytest.approx(0.56, abs=1e-15)
        assert probs[("VP", ("close",))] == pytest.approx(0.24, abs=1e-15)
        assert ("NP", ("N",)) not in probs
        assert ("VP", ("V",)) not in probs

    def test_toy_fidelity(self, toy_cnf, toy_dist):
        for s, p in toy_dist.items():
            assert sentence_inside(toy_cnf, s) == pytest.approx(p, abs=1e-12)

    def test_mixed_fidelity(self, mixed, mixed_dist):
        cnf = to_cnf(mixed)
        assert math.fsum(mixed_dist.values()) == pytest.approx(1.0, abs=1e-12)
        for s, p in mixed_dist.items():
            assert sentence_inside(cnf, s) == pytest.approx(p, abs=1e-12)

    def test_already_cnf_unchanged(self):
        g = parse_grammar(binary_x_text(0.75))
        cnf = to_cnf(g)
        assert set(cnf.rules) == set(g.rules)
        assert cnf.origin == {}

    def test_binarization_schema(self):
        g = parse_grammar("S -> A [0.5]\nS -> s [0.5]\nA -> B C D [0.5]\nA -> a [0.5]\nB -> b [1.0]\nC -> c [1.0]\nD -> d [1.0]\n", start="A")
        cnf = to_cnf(g)
        probs = {(r.lhs, r.rhs): r.prob for r in cnf.rules}
        assert probs[("A", ("B", "A@2@1"))] == 0.5
        assert probs[("A@2@1", ("C", "D"))] == 1.0
        assert "A@2@1" in cnf.origin

    def test_mixed_terminal_wrapped(self, mixed):
        cnf = to_cnf(mixed)
        pre = [r for r in cnf.rules if r.lhs.startswith("S@2@0")]
        assert pre == [Rule("S@2@0=please", ("please",), 1.0)]
        for r in cnf.rules:
            assert len(r.rhs) in (1, 2)

    def test_cnf_sums(self, mixed):
        cnf = to_cnf(mixed)
        for x in cnf.nonterminals:
            assert math.fsum(r.prob for r in cnf.rules if r.lhs == x) == pytest.approx(1.0, abs=1e-9)

    def test_unit_cycle(self):
        g = parse_grammar("S -> A [0.5]\nS -> s [0.5]\nA -> S [0.5]\nA -> a [0.5]\n")
        cnf = to_cnf(g)
        dist = {("s",): 0.5 / 0.75, ("a",): 0.25 / 0.75}
        for s, p in dist.items():
            assert sentence_inside(cnf, s) == pytest.approx(p, abs=1e-12)

    def test_divergent_unit_cycle(self):
        g = parse_grammar("S -> A [1.0]\nA -> S [1.0]\n")
        with pytest.raises(GrammarError, match="diverges"):
            to_cnf(g)

    def test_epsilon_rejected(self):
        with pytest.raises(GrammarError):
            to_cnf(parse_grammar("S -> A [1.0]\nA -> [1.0]\n"))

    def test_non_cnf_rejected_by_constructor(self):
        with pytest.raises(GrammarError):
            CnfGrammar((Rule("S", ("a", "b"), 1.0),), "S")


class TestInside:
    def test_book_open(self, toy_cnf):
        assert sentence_inside(toy_cnf, ["book", "open"]) == pytest.approx(0.224, abs=1e-15)

    def test_no_parse(self, toy_cnf):
        assert sentence_inside(toy_cnf, ["open", "book"]) == 0.0

    def test_oov(self, toy_cnf):
        assert sentence_inside(toy_cnf, ["book", "flies"]) == 0.0

    def test_deterministic(self):
        assert sentence_inside(to_cnf(parse_grammar(binary_x_text(1.0))), ["x"]) == 1.0

    def test_language_sums_to_one(self, toy_cnf, toy_dist):
        assert math.fsum(sentence_inside(toy_cnf, s) for s in toy_dist) == pytest.approx(1.0, abs=1e-12)

    def test_binary_x_catalan(self):
        # S -> S S | x: a string of n x's has Catalan(n-1) derivations
        p = 0.75
        cnf = to_cnf(parse_grammar(binary_x_text(p)))
        for n in range(1, 7):
            cat = math.comb(2 * (n - 1), n - 1) // n
            assert sentence_inside(cnf, ["x"] * n) == pytest.approx(cat * p**n * (1 - p) ** (n - 1), rel=1e-12)
