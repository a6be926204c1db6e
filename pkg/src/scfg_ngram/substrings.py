"""Prefix and suffix generation probabilities.

``P(X =>*_L w)`` is the probability that X derives a string beginning with
``w`` (a string equal to ``w`` counts).  Single-word prefix probabilities
(left corners) come from one solve against ``I - A_L``; longer prefixes are
solved by induction on length against the same factorization.  Suffix
probabilities are prefix probabilities of the mirrored grammar on the
reversed string.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .grammar import CnfGrammar, Rule, inside_chart
from .linalg import Factorization, lu_factor, lu_solve

LEFT = "left"
RIGHT = "right"


def mirror(g: CnfGrammar) -> CnfGrammar:
    rules = tuple(Rule(r.lhs, r.rhs[::-1], r.prob) if len(r.rhs) == 2 else r for r in g.rules)
    return CnfGrammar(rules, g.start, dict(g.origin))


def corner_matrix(g: CnfGrammar, side: str = LEFT) -> np.ndarray:
    """A_L[X, Y] = sum_Z P(X -> Y Z); A_R[X, Z] = sum_Y P(X -> Y Z)."""
    n = g.n_nonterminals
    lhs, left, right, prob = g.binary_arrays
    a = np.zeros((n, n))
    np.add.at(a, (lhs, left if side == LEFT else right), prob)
    return a


@dataclass(frozen=True, eq=False)
class CornerSystem:
    side: str
    matrix: np.ndarray
    factorization: Factorization

    @classmethod
    def build(cls, g: CnfGrammar, side: str = LEFT) -> "CornerSystem":
        if side not in (LEFT, RIGHT):
            raise ValueError(f"side must be {LEFT!r} or {RIGHT!r}")
        a = corner_matrix(g, side)
        return cls(side, a, lu_factor(np.eye(g.n_nonterminals) - a))


def corner_probs(cs: CornerSystem, g: CnfGrammar, word: str) -> np.ndarray:
    """P(X =>*_L word) (or =>*_R for a right-corner system), for every X."""
    t = g.lexical_column(word)
    if not t.any():
        return t
    return lu_solve(cs.factorization, t)


class PrefixTable:
    """Memoized prefix (``side='left'``) or suffix (``side='right'``) probabilities.

    Keys are word tuples in surface order; a suffix table reverses them and
    looks them up as prefixes of the mirrored grammar.  Lookups may race
    benignly since every value is a deterministic function of its key.
    """

    def __init__(self, g: CnfGrammar, side: str = LEFT, stats: Counter | None = None):
        self.side = side
        self.source = g
        self.grammar = g if side == LEFT else mirror(g)
        self.stats = stats if stats is not None else Counter()
        self.corner = CornerSystem.build(self.grammar, LEFT)
        self.stats[f"factorizations.{side}_corner"] += 1
        lex = self.grammar.lexical_matrix
        self.corners = lu_solve(self.corner.factorization, lex) if lex.size else lex.copy()
        self.corners.setflags(write=False)
        self._memo: dict[tuple[str, ...], np.ndarray] = {}
        self._inside: dict[tuple[str, ...], np.ndarray] = {}
        self._zero = np.zeros(g.n_nonterminals)
        self._zero.setflags(write=False)

    def __call__(self, words: Sequence[str]) -> np.ndarray:
        key = tuple(words) if self.side == LEFT else tuple(reversed(words))
        return self._prefix(key)

    def clear(self) -> None:
        self._memo.clear()
        self._inside.clear()

    def _prefix(self, w: tuple[str, ...]) -> np.ndarray:
        hit = self._memo.get(w)
        if hit is not None:
            return hit
        g = self.grammar
        if not w:
            raise ValueError("prefix probabilities need a non-empty string")
        if any(x not in g.word_index for x in w):
            val = self._zero
        elif len(w) == 1:
            val = self.corners[:, g.word_index[w[0]]]
        else:
            b = np.zeros(g.n_nonterminals)
            for j in range(1, len(w)):
                head = self._exact(w[:j])
                tail = self._prefix(w[j:])
                if head.any() and tail.any():
                    b += g.combine(head, tail)
            if b.any():
                val = lu_solve(self.corner.factorization, b)
                self.stats[f"solves.{self.side}_prefix"] += 1
            else:
                val = self._zero
        if val.flags.writeable:
            val.setflags(write=False)
        self._memo[w] = val
        return val

    def _exact(self, w: tuple[str, ...]) -> np.ndarray:
        hit = self._inside.get(w)
        if hit is not None:
            return hit
        chart = inside_chart(self.grammar, w)
        for j in range(1, len(w) + 1):
            self._inside.setdefault(w[:j], chart[0, j])
        return self._inside[w]

    def exact(self, words: Sequence[str]) -> np.ndarray:
        """P(X =>* words) exactly, for every X."""
        key = tuple(words) if self.side == LEFT else tuple(reversed(words))
        return self._exact(key)


def prefix_probs(pt: PrefixTable, w: Sequence[str]) -> np.ndarray:
    if pt.side != LEFT:
        raise ValueError("prefix_probs needs a left (prefix) table")
    return pt(w)


def suffix_probs(g: CnfGrammar, w: Sequence[str], table: PrefixTable | None = None) -> np.ndarray:
    """P(X =>*_R w): X derives a string ending in ``w``."""
    if table is None:
        table = PrefixTable(g, RIGHT)
    elif table.side != RIGHT:
        raise ValueError("suffix_probs needs a right (suffix) table")
    return table(w)
