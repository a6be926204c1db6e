"""Substring expectations c(w|X) from the linear system (I - A) c = b.

The coefficient matrix depends only on the grammar and is factored once;
each substring costs one right-hand side and one pair of triangular solves.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .consistency import expectancy_matrix
from .grammar import CnfGrammar
from .linalg import Factorization, lu_factor, lu_solve
from .substrings import LEFT, RIGHT, PrefixTable


@dataclass(frozen=True, eq=False)
class ExpectationVector:
    substring: tuple[str, ...]
    values: np.ndarray

    @property
    def language(self) -> float:
        """c(w|S), the expected count per sentence."""
        return float(self.values[0])


def coefficient_matrix(g: CnfGrammar) -> np.ndarray:
    # a[X, U] = sum over X -> Y Z of P(X -> Y Z) (delta(Y, U) + delta(Z, U))
    return expectancy_matrix(g)


def rhs_vector(
    g: CnfGrammar, w: Sequence[str], prefix: PrefixTable, suffix: PrefixTable
) -> np.ndarray:
    """b[X] = P(X -> w) + sum over X -> Y Z and splits of suffix(Y) * prefix(Z)."""
    w = tuple(w)
    if not w:
        raise ValueError("substring must be non-empty")
    if any(x not in g.word_index for x in w):
        return np.zeros(g.n_nonterminals)
    if len(w) == 1:
        return g.lexical_column(w[0])
    b = np.zeros(g.n_nonterminals)
    for j in range(1, len(w)):
        head = suffix(w[:j])
        tail = prefix(w[j:])
        if head.any() and tail.any():
            b += g.combine(head, tail)
    return b


def expectations(f: Factorization, b: np.ndarray) -> np.ndarray:
    return lu_solve(f, b)


class ExpectationEngine:
    """Per-grammar solver holding the shared factorization of ``I - A``."""

    def __init__(
        self,
        g: CnfGrammar,
        stats: Counter | None = None,
        prefix: PrefixTable | None = None,
        suffix: PrefixTable | None = None,
    ):
        self.grammar = g
        self.stats = stats if stats is not None else Counter()
        self.prefix = prefix if prefix is not None else PrefixTable(g, LEFT, self.stats)
        self.suffix = suffix if suffix is not None else PrefixTable(g, RIGHT, self.stats)
        a = coefficient_matrix(g)
        self.factorization = lu_factor(np.eye(g.n_nonterminals) - a)
        self.stats["factorizations.coefficient"] += 1
        self._memo: dict[tuple[str, ...], np.ndarray] = {}

    def rhs(self, w: Sequence[str]) -> np.ndarray:
        return rhs_vector(self.grammar, w, self.prefix, self.suffix)

    def vector(self, w: Sequence[str]) -> np.ndarray:
        w = tuple(w)
        hit = self._memo.get(w)
        if hit is None:
            hit = self.solve_many([w])[0]
        return hit

    def expectation(self, w: Sequence[str]) -> ExpectationVector:
        w = tuple(w)
        return ExpectationVector(w, self.vector(w))

    def count(self, w: Sequence[str]) -> float:
        """c(w|S)."""
        return float(self.vector(w)[0])

    def solve_many(self, strings: Iterable[Sequence[str]]) -> list[np.ndarray]:
        """Expectation vectors for several substrings with one batched solve."""
        keys = [tuple(s) for s in strings]
        todo = [k for k in dict.fromkeys(keys) if k not in self._memo]
        if todo:
            n = self.grammar.n_nonterminals
            rhs = np.empty((n, len(todo)))
            for col, k in enumerate(todo):
                rhs[:, col] = self.rhs(k)
            live = np.flatnonzero(rhs.any(axis=0))
            sol = np.zeros_like(rhs)
            if live.size:
                sol[:, live] = lu_solve(self.factorization, rhs[:, live])
            solved = set(live.tolist())
            for col, k in enumerate(todo):
                v = np.ascontiguousarray(sol[:, col])
                v.setflags(write=False)
                self._memo[k] = v
                if col in solved:
                    self.stats[f"solves.order{len(k)}"] += 1
        return [self._memo[k] for k in keys]
