"""Command line entry point: ``check``, ``ngrams``, ``mix`` and ``sample``."""

from __future__ import annotations

import argparse
import json
import sys

from .consistency import check_consistency
from .grammar import GrammarError, to_cnf
from .ngrams import export_arpa
from .pipeline import (
    EXIT_INCONSISTENT,
    EXIT_INPUT,
    EXIT_OK,
    EXIT_USAGE,
    Diagnostics,
    PipelineConfig,
    StageError,
    compile_table,
    load_grammar,
    prepare,
)
from .sampling import DEFAULT_MAX_EXPANSIONS, compare_to_exact, empirical_ngrams, sample_batch, write_samples


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--grammar", required=True, help="grammar file")
    p.add_argument("--start", help="start symbol (default: first LHS)")
    p.add_argument("--renormalize", action="store_true", help="rescale each LHS to sum to 1")
    p.add_argument("--force", action="store_true", help="continue past a failed consistency check")
    p.add_argument("--diagnostics", help="write JSON diagnostics here")
    p.add_argument("--margin", type=float, default=1e-6, help="consistency margin below 1")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="scfg-ngram", description="Compile an SCFG into an n-gram model.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("check", help="validate and check consistency")
    _common(p)

    for name in ("ngrams", "mix"):
        p = sub.add_parser(name, help="write an ARPA n-gram model" + (" merged with corpus counts" if name == "mix" else ""))
        _common(p)
        p.add_argument("--order", type=int, default=2)
        p.add_argument("--output", help="ARPA output path (default: stdout)")
        p.add_argument("--prune", type=float, default=1e-15)
        p.add_argument("--merge-counts", dest="merge_counts", required=name == "mix")
        p.add_argument("--pseudo-mass", dest="pseudo_mass", type=float, required=name == "mix")

    p = sub.add_parser("sample", help="Monte Carlo sample and empirical n-grams")
    _common(p)
    p.add_argument("--order", type=int, default=2)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-expansions", dest="max_expansions", type=int, default=DEFAULT_MAX_EXPANSIONS)
    p.add_argument("--output", help="sample dump, one sentence per line")
    p.add_argument("--compare", action="store_true", help="compare against the exact table")
    p.add_argument("--prune", type=float, default=1e-15)
    return parser


def _config(args) -> PipelineConfig:
    return PipelineConfig(
        grammar_path=args.grammar,
        order=getattr(args, "order", 2),
        output_path=getattr(args, "output", None),
        start_override=args.start,
        renormalize=args.renormalize,
        force=args.force,
        merge_counts_path=getattr(args, "merge_counts", None),
        pseudo_mass=getattr(args, "pseudo_mass", None),
        samples=getattr(args, "samples", 0),
        seed=getattr(args, "seed", 0),
        max_expansions=getattr(args, "max_expansions", DEFAULT_MAX_EXPANSIONS),
        prune=getattr(args, "prune", 1e-15),
        diagnostics_path=args.diagnostics,
        compare=getattr(args, "compare", False),
        margin=args.margin,
    )


def cmd_check(config: PipelineConfig, diag: Diagnostics) -> int:
    g = load_grammar(config, diag)
    try:
        cnf = to_cnf(g)
    except GrammarError as exc:
        raise StageError("cnf", exc, EXIT_INPUT) from exc
    report = check_consistency(cnf, config.margin)
    diag.consistency = report
    print(json.dumps({"valid": True, "diagnostics": diag.validation, **report.to_dict()}))
    return EXIT_OK if report.consistent else EXIT_INCONSISTENT


def cmd_ngrams(config: PipelineConfig, diag: Diagnostics) -> int:
    table, _ = compile_table(config, diag)
    with diag.stage("export"):
        if config.output_path:
            with open(config.output_path, "w", encoding="utf-8") as fh:
                export_arpa(table, fh)
        else:
            export_arpa(table, sys.stdout)
    return EXIT_OK


def cmd_sample(config: PipelineConfig, diag: Diagnostics) -> int:
    cnf = prepare(config, diag)
    with diag.stage("sampling"):
        batch = sample_batch(cnf, config.samples, config.seed, config.max_expansions)
    if config.output_path:
        with open(config.output_path, "w", encoding="utf-8") as fh:
            write_samples(batch, fh)
    est = empirical_ngrams(batch, config.order)
    completed = len(batch.sentences)
    report = {
        "requested": batch.requested,
        "completed": completed,
        "truncated": batch.truncated_count,
        "seed": batch.seed,
        "order": config.order,
        "mean_length": sum(len(s) for s in batch.sentences) / completed,
        "ngrams": [
            {"ngram": " ".join(k), "count": e.count, "freq": e.freq, "stderr": e.stderr}
            for k, e in sorted(est.items())
        ],
    }
    if config.compare:
        exact, _ = compile_table(config, diag, cnf)
        report["compare"] = compare_to_exact(exact, batch, config.order)
    diag.extra["sample"] = {k: v for k, v in report.items() if k != "ngrams"}
    print(json.dumps(report, indent=1))
    return EXIT_OK


COMMANDS = {"check": cmd_check, "ngrams": cmd_ngrams, "mix": cmd_ngrams, "sample": cmd_sample}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # --help exits 0, argument errors exit with the usage code
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        config = _config(args)
    except ValueError as exc:
        print(f"scfg-ngram: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    diag = Diagnostics()
    try:
        code = COMMANDS[args.command](config, diag)
    except StageError as exc:
        print(f"scfg-ngram: {exc.stage} failed: {exc.cause}", file=sys.stderr)
        if exc.stage in ("consistency",) and diag.consistency is not None:
            print(json.dumps(diag.consistency.to_dict()))
        code = exc.exit_code
    diag.extra["exit_code"] = code
    diag.write(config.diagnostics_path)
    return code


if __name__ == "__main__":
    sys.exit(main())
