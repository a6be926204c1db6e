"""End-to-end compilation: grammar file -> CNF -> consistency -> solves -> n-gram table."""

from __future__ import annotations

import json
import time
from collections import Counter
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path

from .consistency import DEFAULT_MARGIN, ConsistencyReport, InconsistentGrammarError, check_consistency
from .expectations import ExpectationEngine
from .grammar import CnfGrammar, Grammar, GrammarError, parse_grammar, renormalize, to_cnf, validate
from .linalg import SingularMatrixError
from .ngrams import PRUNE_THRESHOLD, CountMergeSpec, NGramTable, build_table, merge_counts, read_counts
from .sampling import DEFAULT_MAX_EXPANSIONS
from .substrings import LEFT, RIGHT, PrefixTable

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INPUT = 2
EXIT_INCONSISTENT = 3
EXIT_NUMERIC = 4


class StageError(Exception):
    def __init__(self, stage: str, cause: BaseException | str, exit_code: int):
        super().__init__(f"{stage}: {cause}")
        self.stage = stage
        self.cause = cause
        self.exit_code = exit_code


@dataclass
class PipelineConfig:
    grammar_path: str
    order: int = 2
    output_path: str | None = None
    start_override: str | None = None
    renormalize: bool = False
    force: bool = False
    merge_counts_path: str | None = None
    pseudo_mass: float | None = None
    samples: int = 0
    seed: int = 0
    max_expansions: int = DEFAULT_MAX_EXPANSIONS
    prune: float = PRUNE_THRESHOLD
    diagnostics_path: str | None = None
    compare: bool = False
    margin: float = DEFAULT_MARGIN

    def __post_init__(self):
        if self.order < 1:
            raise ValueError(f"order must be >= 1, got {self.order}")
        if self.merge_counts_path is not None and not (self.pseudo_mass or 0) > 0:
            raise ValueError("--merge-counts needs a positive --pseudo-mass")


@dataclass
class Diagnostics:
    timings: dict[str, float] = field(default_factory=dict)
    counters: Counter = field(default_factory=Counter)
    validation: list[dict] = field(default_factory=list)
    consistency: ConsistencyReport | None = None
    extra: dict = field(default_factory=dict)

    @contextmanager
    def stage(self, name: str):
        t0 = time.perf_counter()
        try:
            yield
        finally:
            self.timings[name] = self.timings.get(name, 0.0) + time.perf_counter() - t0

    def to_dict(self) -> dict:
        out = {
            "validation": self.validation,
            "consistency": self.consistency.to_dict() if self.consistency else None,
            "timings": self.timings,
            "counters": dict(sorted(self.counters.items())),
        }
        out.update(self.extra)
        return out

    def write(self, path: str | None) -> None:
        if path:
            Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")


def load_grammar(config: PipelineConfig, diag: Diagnostics) -> Grammar:
    with diag.stage("parse"):
        try:
            text = Path(config.grammar_path).read_text(encoding="utf-8")
            g = parse_grammar(text, start=config.start_override)
        except (OSError, UnicodeDecodeError, GrammarError) as exc:
            raise StageError("parse", exc, EXIT_INPUT) from exc
    if config.renormalize:
        g = renormalize(g)
    with diag.stage("validate"):
        problems = validate(g)
        diag.validation = [d.to_dict() for d in problems]
    if problems:
        raise StageError("validate", "; ".join(d.message for d in problems), EXIT_INPUT)
    return g


def prepare(config: PipelineConfig, diag: Diagnostics) -> CnfGrammar:
    """Parse, validate, convert to CNF and check consistency."""
    g = load_grammar(config, diag)
    with diag.stage("cnf"):
        try:
            cnf = to_cnf(g)
        except (GrammarError, SingularMatrixError) as exc:
            raise StageError("cnf", exc, EXIT_INPUT) from exc
    with diag.stage("consistency"):
        report = check_consistency(cnf, config.margin)
    diag.consistency = report
    if not report.consistent and not config.force:
        raise StageError("consistency", InconsistentGrammarError(report), EXIT_INCONSISTENT)
    return cnf


def make_engine(cnf: CnfGrammar, diag: Diagnostics) -> ExpectationEngine:
    try:
        with diag.stage("corner_factorization"):
            prefix = PrefixTable(cnf, LEFT, diag.counters)
            suffix = PrefixTable(cnf, RIGHT, diag.counters)
        with diag.stage("coefficient_factorization"):
            return ExpectationEngine(cnf, diag.counters, prefix, suffix)
    except SingularMatrixError as exc:
        raise StageError("factorization", exc, EXIT_NUMERIC) from exc


def compile_table(
    config: PipelineConfig, diag: Diagnostics | None = None, cnf: CnfGrammar | None = None
) -> tuple[NGramTable, Diagnostics]:
    diag = diag if diag is not None else Diagnostics()
    if cnf is None:
        cnf = prepare(config, diag)
    engine = make_engine(cnf, diag)
    with diag.stage("ngram_solves"):
        table = build_table(cnf, config.order, engine, prune=config.prune)
    if config.merge_counts_path is not None:
        with diag.stage("merge"):
            try:
                with open(config.merge_counts_path, encoding="utf-8") as fh:
                    corpus = read_counts(fh)
            except (OSError, ValueError) as exc:
                raise StageError("merge", exc, EXIT_INPUT) from exc
            table = merge_counts(table, CountMergeSpec(config.pseudo_mass, corpus))
    diag.extra["table"] = {
        "order": table.order,
        "contexts": len(table.probs),
        "entries": {k: len(table.entries(k)) for k in range(1, table.order + 1)},
    }
    return table, diag
