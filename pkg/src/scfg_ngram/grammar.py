"""Grammar data model, text format, validation and conversion to CNF.

Symbols are plain strings.  A symbol is a nonterminal iff it appears as the
left-hand side of some rule; everything else is a terminal.
"""

from __future__ import annotations

import math
import re
from collections import defaultdict
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .linalg import SingularMatrixError, lu_factor, lu_solve, spectral_radius_estimate

SUM_TOLERANCE = 1e-6
CNF_SUM_TOLERANCE = 1e-9


class GrammarError(ValueError):
    """Raised for grammars that cannot be parsed or transformed."""


class GrammarSyntaxError(GrammarError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


@dataclass(frozen=True)
class Rule:
    lhs: str
    rhs: tuple[str, ...]
    prob: float

    def __str__(self) -> str:
        return f"{self.lhs} -> {' '.join(self.rhs)} [{self.prob!r}]"


@dataclass(frozen=True)
class Diagnostic:
    code: str
    symbol: str
    message: str

    def to_dict(self) -> dict:
        return {"code": self.code, "symbol": self.symbol, "message": self.message}


@dataclass(frozen=True)
class Grammar:
    rules: tuple[Rule, ...]
    start: str

    @cached_property
    def nonterminals(self) -> tuple[str, ...]:
        return tuple(dict.fromkeys(r.lhs for r in self.rules))

    @cached_property
    def vocab(self) -> tuple[str, ...]:
        nts = set(self.nonterminals)
        return tuple(dict.fromkeys(s for r in self.rules for s in r.rhs if s not in nts))

    def is_nonterminal(self, symbol: str) -> bool:
        return symbol in self._nt_set

    @cached_property
    def _nt_set(self) -> frozenset[str]:
        return frozenset(self.nonterminals)

    def rules_for(self, lhs: str) -> list[Rule]:
        return [r for r in self.rules if r.lhs == lhs]


_RULE_RE = re.compile(r"^\s*(\S+)\s+->(.*?)\[([^\]]*)\]\s*$")


def parse_grammar(text: str, start: str | None = None) -> Grammar:
    """Parse ``LHS -> sym ... [prob]`` lines into a :class:`Grammar`.

    Zero-probability rules are dropped.  The start symbol defaults to the
    first left-hand side in the file.
    """
    rules = []
    first_lhs = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        m = _RULE_RE.match(line)
        if m is None:
            if "->" not in line:
                col = len(line) - len(line.lstrip()) + 1
                raise GrammarSyntaxError("expected 'LHS -> symbols [prob]'", lineno, col)
            col = line.index("->") + 1
            if "[" not in line:
                raise GrammarSyntaxError("missing '[prob]'", lineno, len(line.rstrip()) + 1)
            raise GrammarSyntaxError("malformed rule", lineno, col)
        lhs, rhs_text, prob_text = m.group(1), m.group(2), m.group(3)
        if first_lhs is None:
            first_lhs = lhs
        try:
            prob = float(prob_text)
        except ValueError:
            raise GrammarSyntaxError(
                f"bad probability {prob_text.strip()!r}", lineno, m.start(3) + 1
            ) from None
        if not math.isfinite(prob) or prob < 0.0 or prob > 1.0:
            raise GrammarSyntaxError(
                f"probability {prob} outside (0, 1]", lineno, m.start(3) + 1
            )
        if prob == 0.0:
            continue
        rules.append(Rule(lhs, tuple(rhs_text.split()), prob))
    if first_lhs is None:
        raise GrammarError("empty grammar")
    return Grammar(tuple(rules), start if start is not None else first_lhs)


def serialize(g: Grammar) -> str:
    # start symbol goes first so that re-parsing recovers it
    ordered = sorted(g.rules, key=lambda r: r.lhs != g.start)
    return "".join(f"{r}\n" for r in ordered)


def validate(g: Grammar) -> list[Diagnostic]:
    out = []
    if not g.is_nonterminal(g.start):
        out.append(Diagnostic("start", g.start, f"start symbol {g.start!r} has no rules"))
    totals: dict[str, list[float]] = defaultdict(list)
    for r in g.rules:
        if not r.rhs:
            out.append(Diagnostic("epsilon", r.lhs, f"epsilon rule for {r.lhs}"))
        totals[r.lhs].append(r.prob)
    for lhs, probs in totals.items():
        s = math.fsum(probs)
        if abs(s - 1.0) > SUM_TOLERANCE:
            out.append(Diagnostic("sum", lhs, f"rules for {lhs} sum to {s:.9g}, not 1"))
    return out


def renormalize(g: Grammar) -> Grammar:
    totals: dict[str, list[float]] = defaultdict(list)
    for r in g.rules:
        totals[r.lhs].append(r.prob)
    sums = {k: math.fsum(v) for k, v in totals.items()}
    return Grammar(tuple(Rule(r.lhs, r.rhs, r.prob / sums[r.lhs]) for r in g.rules), g.start)


@dataclass(frozen=True, eq=False)
class CnfGrammar:
    """A grammar whose rules are all ``X -> Y Z`` or ``X -> word``.

    Nonterminals are indexed with the start symbol at position 0.  ``origin``
    maps nonterminals introduced by :func:`to_cnf` to a description of where
    they came from.
    """

    rules: tuple[Rule, ...]
    start: str
    origin: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        nts = {r.lhs for r in self.rules}
        if self.start not in nts:
            raise GrammarError(f"start symbol {self.start!r} has no rules")
        for r in self.rules:
            binary = len(r.rhs) == 2 and all(s in nts for s in r.rhs)
            lexical = len(r.rhs) == 1 and r.rhs[0] not in nts
            if not (binary or lexical):
                raise GrammarError(f"rule not in CNF: {r}")

    @cached_property
    def nonterminals(self) -> tuple[str, ...]:
        order = dict.fromkeys([self.start])
        order.update(dict.fromkeys(r.lhs for r in self.rules))
        return tuple(order)

    @cached_property
    def vocab(self) -> tuple[str, ...]:
        return tuple(dict.fromkeys(r.rhs[0] for r in self.rules if len(r.rhs) == 1))

    @cached_property
    def nt_index(self) -> dict[str, int]:
        return {x: i for i, x in enumerate(self.nonterminals)}

    @cached_property
    def word_index(self) -> dict[str, int]:
        return {w: i for i, w in enumerate(self.vocab)}

    @property
    def n_nonterminals(self) -> int:
        return len(self.nonterminals)

    @cached_property
    def binary_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """(lhs, left, right, prob) arrays over the binary rules."""
        idx = self.nt_index
        bins = [r for r in self.rules if len(r.rhs) == 2]
        lhs = np.array([idx[r.lhs] for r in bins], dtype=np.intp)
        left = np.array([idx[r.rhs[0]] for r in bins], dtype=np.intp)
        right = np.array([idx[r.rhs[1]] for r in bins], dtype=np.intp)
        prob = np.array([r.prob for r in bins], dtype=float)
        return lhs, left, right, prob

    @cached_property
    def lexical_matrix(self) -> np.ndarray:
        """N x V matrix of P(X -> word)."""
        t = np.zeros((self.n_nonterminals, len(self.vocab)))
        for r in self.rules:
            if len(r.rhs) == 1:
                t[self.nt_index[r.lhs], self.word_index[r.rhs[0]]] += r.prob
        t.setflags(write=False)
        return t

    def lexical_column(self, word: str) -> np.ndarray:
        j = self.word_index.get(word)
        if j is None:
            return np.zeros(self.n_nonterminals)
        return self.lexical_matrix[:, j].copy()

    def combine(self, left_vals: np.ndarray, right_vals: np.ndarray) -> np.ndarray:
        """Sum over X -> Y Z of P(X -> Y Z) * left_vals[Y] * right_vals[Z], per X."""
        lhs, left, right, prob = self.binary_arrays
        w = prob * left_vals[left] * right_vals[right]
        return np.bincount(lhs, weights=w, minlength=self.n_nonterminals)

    def to_grammar(self) -> Grammar:
        return Grammar(self.rules, self.start)


def _fresh(name: str, taken: set[str]) -> str:
    if name in taken:
        raise GrammarError(f"fresh nonterminal {name!r} collides with an existing symbol")
    taken.add(name)
    return name


def to_cnf(g: Grammar) -> CnfGrammar:
    """Convert to CNF, preserving the probability of every terminal string.

    Terminals inside longer right-hand sides are wrapped in fresh
    preterminals, long right-hand sides are binarized with probability-1
    continuation rules, and unit rules are folded in through the closure
    ``(I - U)^-1`` of the unit-rule matrix.
    """
    for d in validate(g):
        raise GrammarError(d.message)
    taken = set(g.nonterminals) | set(g.vocab)
    origin: dict[str, str] = {}
    units: list[Rule] = []
    proper: list[Rule] = []
    for i, r in enumerate(g.rules):
        rhs = list(r.rhs)
        if len(rhs) == 1:
            (units if g.is_nonterminal(rhs[0]) else proper).append(r)
            continue
        for j, s in enumerate(rhs):
            if not g.is_nonterminal(s):
                pre = _fresh(f"{r.lhs}@{i}@{j}={s}", taken)
                origin[pre] = f"preterminal for {s!r} in rule {i}"
                proper.append(Rule(pre, (s,), 1.0))
                rhs[j] = pre
        lhs, p = r.lhs, r.prob
        for j in range(1, len(rhs) - 1):
            rest = _fresh(f"{r.lhs}@{i}@{j}", taken)
            origin[rest] = f"binarization of rule {i} from position {j}"
            proper.append(Rule(lhs, (rhs[j - 1], rest), p))
            lhs, p = rest, 1.0
        proper.append(Rule(lhs, (rhs[-2], rhs[-1]), p))

    if units:
        proper = _fold_units(g, units, proper)

    rules = _prune_unreachable(proper, g.start)
    rules = _merge_and_normalize(rules)
    origin = {k: v for k, v in origin.items() if any(r.lhs == k for r in rules)}
    return CnfGrammar(tuple(rules), g.start, origin)


def _fold_units(g: Grammar, units: list[Rule], proper: list[Rule]) -> list[Rule]:
    nts = list(g.nonterminals)
    idx = {x: i for i, x in enumerate(nts)}
    n = len(nts)
    u = np.zeros((n, n))
    for r in units:
        u[idx[r.lhs], idx[r.rhs[0]]] += r.prob
    rho = spectral_radius_estimate(u).radius
    if rho >= 1.0 - 1e-12:
        raise GrammarError(f"unit-rule closure diverges (spectral radius {rho:.6g})")
    try:
        closure = lu_solve(lu_factor(np.eye(n) - u), np.eye(n))
    except SingularMatrixError as exc:
        raise GrammarError(f"unit-rule closure is singular: {exc}") from exc
    # structural reachability keeps roundoff from inventing rules
    reach = np.eye(n, dtype=bool) | (u > 0)
    for _ in range(n):
        nxt = reach | ((reach.astype(np.int64) @ reach.astype(np.int64)) > 0)
        if (nxt == reach).all():
            break
        reach = nxt
    by_lhs: dict[str, list[Rule]] = defaultdict(list)
    for r in proper:
        by_lhs[r.lhs].append(r)
    out = [r for r in proper if r.lhs not in idx]
    for x in nts:
        i = idx[x]
        for y in nts:
            k = idx[y]
            if not reach[i, k]:
                continue
            for r in by_lhs.get(y, ()):
                out.append(Rule(x, r.rhs, closure[i, k] * r.prob))
    return out


def _prune_unreachable(rules: list[Rule], start: str) -> list[Rule]:
    by_lhs: dict[str, list[Rule]] = defaultdict(list)
    for r in rules:
        by_lhs[r.lhs].append(r)
    seen = {start}
    stack = [start]
    while stack:
        x = stack.pop()
        for r in by_lhs.get(x, ()):
            for s in r.rhs:
                if s in by_lhs and s not in seen:
                    seen.add(s)
                    stack.append(s)
    return [r for r in rules if r.lhs in seen]


def _merge_and_normalize(rules: list[Rule]) -> list[Rule]:
    merged: dict[tuple[str, tuple[str, ...]], list[float]] = {}
    for r in rules:
        merged.setdefault((r.lhs, r.rhs), []).append(r.prob)
    totals: dict[str, list[float]] = defaultdict(list)
    for (lhs, _), ps in merged.items():
        totals[lhs].extend(ps)
    sums = {k: math.fsum(v) for k, v in totals.items()}
    out = []
    for (lhs, rhs), ps in merged.items():
        p = math.fsum(ps)
        if abs(sums[lhs] - 1.0) > 1e-12:
            p /= sums[lhs]
        out.append(Rule(lhs, rhs, p))
    return out


def inside_chart(g: CnfGrammar, words: Sequence[str]) -> np.ndarray:
    """CYK inside chart: ``chart[i, j]`` is the vector P(X =>* words[i:j]).

    Shape ``(n, n + 1, N)``; only entries with ``i < j`` are meaningful.
    Out-of-vocabulary words give zero rows.
    """
    n = len(words)
    chart = np.zeros((n, n + 1, g.n_nonterminals))
    for i, w in enumerate(words):
        chart[i, i + 1] = g.lexical_column(w)
    for span in range(2, n + 1):
        for i in range(n - span + 1):
            j = i + span
            acc = chart[i, j]
            for k in range(i + 1, j):
                acc += g.combine(chart[i, k], chart[k, j])
    return chart


def sentence_inside(g: CnfGrammar, sentence: Sequence[str]) -> float:
    """Probability that the start symbol derives exactly ``sentence``."""
    if not sentence:
        return 0.0
    return float(inside_chart(g, sentence)[0, len(sentence), 0])


def grammar_from_rules(rules: Iterable[tuple[str, Sequence[str], float]], start: str) -> Grammar:
    return Grammar(tuple(Rule(l, tuple(r), p) for l, r, p in rules), start)
