"""Conditional n-gram tables from substring expectations, count merging, ARPA I/O."""

from __future__ import annotations

import math
import warnings
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import IO, Iterable, Mapping

from .expectations import ExpectationEngine
from .grammar import CnfGrammar

BOS = "<s>"
EOS = "</s>"
PRUNE_THRESHOLD = 1e-15
ARPA_NO_PROB = -99.0

NGram = tuple[str, ...]


@dataclass(frozen=True, eq=False)
class NGramTable:
    """Conditional probabilities for every order 1..``order``.

    ``probs[context][event]`` is P(event | context), where a context is a
    word tuple of length k-1 (possibly starting with ``<s>``) and an event is
    a word or ``</s>``.  ``counts`` holds the expected counts the
    conditionals were derived from, for contexts and full n-grams alike;
    the empty context counts every event position in a sentence.
    """

    order: int
    vocab: tuple[str, ...]
    probs: dict[NGram, dict[str, float]]
    counts: dict[NGram, float] = field(default_factory=dict)

    def prob(self, event: str, context: Iterable[str] = ()) -> float:
        return self.probs.get(tuple(context), {}).get(event, 0.0)

    def contexts(self, k: int) -> list[NGram]:
        """Contexts of the k-gram level (length k-1)."""
        return [c for c in self.probs if len(c) == k - 1]

    def entries(self, k: int) -> list[tuple[NGram, float]]:
        out = [
            (ctx + (e,), p)
            for ctx, dist in self.probs.items()
            if len(ctx) == k - 1
            for e, p in dist.items()
        ]
        out.sort()
        return out


def build_table(
    g: CnfGrammar,
    order: int,
    engine: ExpectationEngine | None = None,
    prune: float = PRUNE_THRESHOLD,
) -> NGramTable:
    """Conditional n-gram probabilities as ratios of substring expectations.

    Contexts starting at a sentence boundary use prefix probabilities of the
    start symbol as their counts; events ending a sentence use suffix
    probabilities, and ``<s> u </s>`` uses the probability of the sentence u.
    Candidate k-grams are the nonzero (k-1)-grams extended by every word.
    The caller is responsible for checking consistency first.
    """
    if order < 1:
        raise ValueError(f"order must be >= 1, got {order}")
    if engine is None:
        engine = ExpectationEngine(g)
    vocab = g.vocab
    counts: dict[NGram, float] = {}

    # word strings with nonzero expectation, by length
    levels: dict[int, list[NGram]] = {}
    unigrams = engine.solve_many([(w,) for w in vocab])
    levels[1] = []
    for w, vec in zip(vocab, unigrams):
        if vec[0] > prune:
            counts[(w,)] = float(vec[0])
            levels[1].append((w,))
    for k in range(2, order + 1):
        levels[k] = []
        for u in levels[k - 1]:
            cands = [u + (v,) for v in vocab]
            for s, vec in zip(cands, engine.solve_many(cands)):
                if vec[0] > prune:
                    counts[s] = float(vec[0])
                    levels[k].append(s)

    # sentence-initial strings: c(<s> u) = P(S =>*_L u)
    initial: dict[int, list[NGram]] = {0: [()]}
    counts[(BOS,)] = 1.0
    for k in range(1, order):
        initial[k] = []
        for u in initial[k - 1]:
            for v in vocab:
                s = u + (v,)
                p = float(engine.prefix(s)[0])
                if p > prune:
                    counts[(BOS,) + s] = p
                    initial[k].append(s)

    probs: dict[NGram, dict[str, float]] = {}

    total = math.fsum(counts[u] for u in levels[1]) + 1.0
    counts[()] = total
    counts[(EOS,)] = 1.0
    dist = {u[0]: counts[u] / total for u in levels[1]}
    dist[EOS] = 1.0 / total
    probs[()] = dist

    for k in range(2, order + 1):
        nxt = defaultdict(list)
        for s in levels[k]:
            nxt[s[:-1]].append(s[-1])
        for u in levels[k - 1]:
            cu = counts[u]
            dist = {v: counts[u + (v,)] / cu for v in nxt.get(u, ())}
            end = float(engine.suffix(u)[0])
            if end > prune:
                counts[u + (EOS,)] = end
                dist[EOS] = end / cu
            probs[u] = dist
        init_next = defaultdict(list)
        for s in initial[k - 1]:
            init_next[s[:-1]].append(s[-1])
        for u in initial[k - 2]:
            ctx = (BOS,) + u
            cu = counts[ctx]
            dist = {v: counts[ctx + (v,)] / cu for v in init_next.get(u, ())}
            if u:
                whole = float(engine.prefix.exact(u)[0])
                if whole > prune:
                    counts[ctx + (EOS,)] = whole
                    dist[EOS] = whole / cu
            probs[ctx] = dist
    return NGramTable(order, vocab, probs, counts)


@dataclass(frozen=True)
class CountMergeSpec:
    pseudo_mass: float
    corpus_counts: Mapping[NGram, float]

    def __post_init__(self):
        if not self.pseudo_mass >= 0.0:
            raise ValueError(f"pseudo mass must be non-negative, got {self.pseudo_mass}")
        bad = [k for k, c in self.corpus_counts.items() if c < 0]
        if bad:
            raise ValueError(f"negative corpus count for {' '.join(bad[0])}")


def merge_counts(table: NGramTable, spec: CountMergeSpec) -> NGramTable:
    """Add ``pseudo_mass`` x expected counts to corpus counts and renormalize.

    A context whose only mass is from the grammar keeps the grammar's
    distribution unchanged.  Corpus n-grams longer than the table's order are
    ignored.
    """
    m = float(spec.pseudo_mass)
    corpus: dict[NGram, dict[str, float]] = defaultdict(dict)
    longer = 0
    for ngram, c in spec.corpus_counts.items():
        if len(ngram) > table.order:
            longer += 1
            continue
        if c > 0:
            corpus[ngram[:-1]][ngram[-1]] = float(c)
    if longer:
        warnings.warn(f"ignored {longer} corpus n-grams longer than order {table.order}")

    probs: dict[NGram, dict[str, float]] = {}
    counts: dict[NGram, float] = {}
    for ctx in sorted(set(table.probs) | set(corpus)):
        model = table.probs.get(ctx, {})
        seen = corpus.get(ctx)
        if not seen:
            if m > 0 and model:
                probs[ctx] = dict(model)
                counts[ctx] = m * table.counts.get(ctx, 0.0)
                for e in model:
                    counts[ctx + (e,)] = m * table.counts.get(ctx + (e,), 0.0)
            else:
                warnings.warn(f"no mass for context {' '.join(ctx) or '()'}; dropped")
            continue
        denom = m * table.counts.get(ctx, 0.0) + math.fsum(seen.values())
        if denom <= 0.0:
            warnings.warn(f"no mass for context {' '.join(ctx) or '()'}; dropped")
            continue
        dist = {}
        for e in dict.fromkeys([*model, *seen]):
            num = m * table.counts.get(ctx + (e,), 0.0) + seen.get(e, 0.0)
            if num > 0.0:
                dist[e] = num / denom
                counts[ctx + (e,)] = num
        counts[ctx] = denom
        probs[ctx] = dist
    words = set(table.vocab)
    for ctx, dist in corpus.items():
        words.update(ctx)
        words.update(dist)
    words -= {BOS, EOS}
    vocab = tuple(table.vocab) + tuple(sorted(words - set(table.vocab)))
    return NGramTable(table.order, vocab, probs, counts)


def read_counts(lines: Iterable[str]) -> dict[NGram, float]:
    """Parse ``count<TAB>w1 w2 ... wn`` lines; repeated n-grams accumulate."""
    out: Counter = Counter()
    for lineno, line in enumerate(lines, start=1):
        line = line.rstrip("\n")
        if not line.strip():
            continue
        try:
            count_text, words = line.split("\t", 1)
            count = float(count_text)
        except ValueError:
            raise ValueError(f"line {lineno}: expected 'count<TAB>words'") from None
        ngram = tuple(words.split())
        if not ngram:
            raise ValueError(f"line {lineno}: empty n-gram")
        out[ngram] += count
    return dict(out)


def _fmt(x: float) -> str:
    s = f"{x:.10f}"
    return "0.0000000000" if s == "-0.0000000000" else s


def export_arpa(table: NGramTable, sink: IO[str]) -> None:
    """Write ``table`` in ARPA layout: log10 probabilities, backoff 0 below the top order."""
    sections = []
    for k in range(1, table.order + 1):
        entries = table.entries(k)
        if k == 1 and (BOS,) not in dict(entries):
            entries = sorted(entries + [((BOS,), None)])
        sections.append(entries)
    sink.write("\n\\data\\\n")
    for k, entries in enumerate(sections, start=1):
        sink.write(f"ngram {k}={len(entries)}\n")
    for k, entries in enumerate(sections, start=1):
        sink.write(f"\n\\{k}-grams:\n")
        for ngram, p in entries:
            logp = ARPA_NO_PROB if p is None else math.log10(p)
            line = f"{_fmt(logp)}\t{' '.join(ngram)}"
            if k < table.order:
                line += "\t0"
            sink.write(line + "\n")
    sink.write("\n\\end\\\n")


def read_arpa(text: str) -> dict[int, dict[NGram, tuple[float, float | None]]]:
    """Parse an ARPA file into ``{order: {ngram: (log10 prob, backoff or None)}}``."""
    out: dict[int, dict[NGram, tuple[float, float | None]]] = {}
    declared: dict[int, int] = {}
    section = None
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line == "\\data\\":
            section = 0
            continue
        if line == "\\end\\":
            break
        if line.startswith("\\") and line.endswith("-grams:"):
            section = int(line[1 : line.index("-")])
            out[section] = {}
            continue
        if section == 0:
            if line.startswith("ngram "):
                k, n = line[6:].split("=")
                declared[int(k)] = int(n)
            continue
        if section is None:
            continue
        fields = line.split()
        logp = float(fields[0])
        words = tuple(fields[1 : 1 + section])
        bow = float(fields[1 + section]) if len(fields) > 1 + section else None
        out[section][words] = (logp, bow)
    for k, n in declared.items():
        if len(out.get(k, {})) != n:
            raise ValueError(f"{k}-gram section has {len(out.get(k, {}))} entries, header says {n}")
    return out
