"""Monte Carlo sentence sampling and empirical n-gram estimates.

Serves as an independent check on the exact pipeline: it shares nothing
with it beyond the grammar.
"""

from __future__ import annotations

import bisect
import math
from collections import Counter, defaultdict
from dataclasses import dataclass
from typing import IO, NamedTuple

import numpy as np

from .grammar import CnfGrammar
from .ngrams import BOS, EOS, NGram, NGramTable

DEFAULT_MAX_EXPANSIONS = 10_000
MIN_EXPECTED_EVENTS = 100


class UniformStream:
    """Buffered uniform draws from a numpy Generator."""

    def __init__(self, rng: np.random.Generator, block: int = 8192):
        self.rng = rng
        self.block = block
        self._buf: list[float] = []
        self._pos = 0

    def __call__(self) -> float:
        if self._pos >= len(self._buf):
            self._buf = self.rng.random(self.block).tolist()
            self._pos = 0
        u = self._buf[self._pos]
        self._pos += 1
        return u


class Sampler:
    def __init__(self, g: CnfGrammar):
        self.grammar = g
        self._table: dict[str, tuple[list[float], list[tuple[str, ...]]]] = {}
        by_lhs = defaultdict(list)
        for r in g.rules:
            by_lhs[r.lhs].append(r)
        for lhs, rules in by_lhs.items():
            cum = np.cumsum([r.prob for r in rules]).tolist()
            self._table[lhs] = (cum, [r.rhs[::-1] for r in rules])

    def sample(self, uniform, max_expansions: int = DEFAULT_MAX_EXPANSIONS) -> tuple[str, ...] | None:
        """One leftmost derivation from the start symbol; None if truncated."""
        table = self._table
        out = []
        stack = [self.grammar.start]
        expansions = 0
        while stack:
            sym = stack.pop()
            entry = table.get(sym)
            if entry is None:
                out.append(sym)
                continue
            expansions += 1
            if expansions > max_expansions:
                return None
            cum, rhss = entry
            i = bisect.bisect_right(cum, uniform() * cum[-1])
            stack.extend(rhss[min(i, len(rhss) - 1)])
        return tuple(out)


def sample_sentence(
    g: CnfGrammar, rng: np.random.Generator, max_expansions: int = DEFAULT_MAX_EXPANSIONS
) -> tuple[str, ...] | None:
    return Sampler(g).sample(UniformStream(rng, block=64), max_expansions)


@dataclass
class SampleBatch:
    sentences: list[tuple[str, ...]]
    truncated_count: int
    seed: int
    requested: int

    @property
    def truncation_rate(self) -> float:
        return self.truncated_count / self.requested if self.requested else 0.0


def _sample_stream(g, seed_seq, n, max_expansions):
    sampler = Sampler(g)
    uniform = UniformStream(np.random.default_rng(seed_seq))
    sentences, truncated = [], 0
    for _ in range(n):
        s = sampler.sample(uniform, max_expansions)
        if s is None:
            truncated += 1
        else:
            sentences.append(s)
    return sentences, truncated


def sample_batch(
    g: CnfGrammar,
    n: int,
    seed: int = 0,
    max_expansions: int = DEFAULT_MAX_EXPANSIONS,
    streams: int = 1,
    workers: int = 1,
) -> SampleBatch:
    """Draw ``n`` sentences split over ``streams`` independent RNG streams.

    The output depends on ``(seed, streams)`` only; ``workers > 1`` runs the
    streams in separate processes.
    """
    children = np.random.SeedSequence(seed).spawn(streams)
    shares = [n // streams + (i < n % streams) for i in range(streams)]
    jobs = [(g, c, k, max_expansions) for c, k in zip(children, shares)]
    if workers > 1 and streams > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sample_stream, *zip(*jobs)))
    else:
        results = [_sample_stream(*job) for job in jobs]
    sentences = [s for part, _ in results for s in part]
    truncated = sum(t for _, t in results)
    return SampleBatch(sentences, truncated, seed, n)


class Estimate(NamedTuple):
    count: int
    freq: float
    stderr: float


def padded(sentence: tuple[str, ...], order: int) -> tuple[str, ...]:
    # a single boundary marker on each side, as in the exact tables
    return (BOS,) + tuple(sentence) + (EOS,) if order > 1 else tuple(sentence) + (EOS,)


def empirical_ngrams(batch: SampleBatch, order: int) -> dict[NGram, Estimate]:
    """Counts of all order-``order`` windows, with conditional relative frequencies.

    Overlapping occurrences all count.  The standard error is the binomial
    one for the conditional event given its context count.
    """
    if not batch.sentences:
        raise ValueError("empty sample batch")
    counts: Counter = Counter()
    for s in batch.sentences:
        toks = padded(s, order)
        for i in range(len(toks) - order + 1):
            counts[toks[i : i + order]] += 1
    ctx_totals: Counter = Counter()
    for ngram, c in counts.items():
        ctx_totals[ngram[:-1]] += c
    out = {}
    for ngram, c in counts.items():
        n = ctx_totals[ngram[:-1]]
        p = c / n
        out[ngram] = Estimate(c, p, math.sqrt(p * (1.0 - p) / n))
    return out


def context_counts(batch: SampleBatch, order: int) -> Counter:
    out: Counter = Counter()
    for s in batch.sentences:
        toks = padded(s, order)
        for i in range(len(toks) - order + 1):
            out[toks[i : i + order - 1]] += 1
    return out


def compare_to_exact(table: NGramTable, batch: SampleBatch, order: int, min_events: float = MIN_EXPECTED_EVENTS) -> dict:
    """Deviation of empirical conditionals from exact ones, in standard errors.

    Only exact events expected at least ``min_events`` times are compared.
    """
    est = empirical_ngrams(batch, order)
    ctx_n = context_counts(batch, order)
    completed = len(batch.sentences)
    worst, compared = 0.0, 0
    for ngram, p in table.entries(order):
        if completed * table.counts.get(ngram, 0.0) < min_events:
            continue
        e = est.get(ngram)
        p_hat = e.freq if e else 0.0
        n = ctx_n.get(ngram[:-1], 0)
        se = e.stderr if e else (math.sqrt(p * (1 - p) / n) if n else 0.0)
        diff = abs(p - p_hat)
        dev = diff / se if se > 0 else (0.0 if diff <= 1e-9 else math.inf)
        worst = max(worst, dev)
        compared += 1
    exact_length = sum(table.counts.get((w,), 0.0) for w in table.vocab)
    return {
        "compared": compared,
        "max_deviation_se": worst if math.isfinite(worst) else "inf",
        "exact_mean_length": exact_length,
    }


def write_samples(batch: SampleBatch, sink: IO[str]) -> None:
    for s in batch.sentences:
        sink.write(" ".join(s) + "\n")
