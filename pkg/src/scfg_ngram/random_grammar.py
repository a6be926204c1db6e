"""Random sparse CNF grammars that are consistent by construction."""

from __future__ import annotations

import numpy as np

from .grammar import CnfGrammar, Rule


def random_cnf(
    n_nonterminals: int,
    n_words: int,
    max_binary: int = 5,
    binary_mass: tuple[float, float] = (0.1, 0.45),
    max_lexical: int = 3,
    seed: int | np.random.Generator = 0,
) -> CnfGrammar:
    """Each nonterminal gets 1..``max_binary`` binary rules sharing a total
    probability drawn from ``binary_mass``, and lexical rules for the rest.

    Keeping the binary mass below 0.5 bounds every row sum of the expectancy
    matrix below 1, so the grammar is consistent.  Every word is produced by
    at least one nonterminal.
    """
    rng = np.random.default_rng(seed)
    nts = [f"N{i}" for i in range(n_nonterminals)]
    words = [f"w{i}" for i in range(n_words)]
    own: list[list[int]] = [[] for _ in nts]
    for j in range(n_words):
        own[j % n_nonterminals].append(j)
    rules = []
    for i, x in enumerate(nts):
        k = int(rng.integers(1, max_binary + 1))
        mass = float(rng.uniform(*binary_mass))
        weights = rng.dirichlet(np.ones(k)) * mass
        for w in weights:
            y, z = rng.integers(0, n_nonterminals, size=2)
            rules.append(Rule(x, (nts[y], nts[z]), float(w)))
        lex = set(own[i])
        extra = int(rng.integers(0, max_lexical + 1)) if lex else int(rng.integers(1, max_lexical + 1))
        lex.update(int(j) for j in rng.integers(0, n_words, size=extra))
        lex = sorted(lex)
        lw = rng.dirichlet(np.ones(len(lex))) * (1.0 - mass)
        rules.extend(Rule(x, (words[j],), float(p)) for j, p in zip(lex, lw))
    return CnfGrammar(_merge(rules), nts[0])


def _merge(rules: list[Rule]) -> tuple[Rule, ...]:
    acc: dict[tuple[str, tuple[str, ...]], float] = {}
    for r in rules:
        acc[(r.lhs, r.rhs)] = acc.get((r.lhs, r.rhs), 0.0) + r.prob
    return tuple(Rule(l, rhs, p) for (l, rhs), p in acc.items())
