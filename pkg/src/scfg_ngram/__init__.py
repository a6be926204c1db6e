"""Exact n-gram probabilities compiled from stochastic context-free grammars."""

from .consistency import (
    ConsistencyReport,
    InconsistentGrammarError,
    check_consistency,
    expectancy_matrix,
    require_consistent,
)
from .expectations import ExpectationEngine, ExpectationVector, coefficient_matrix, expectations, rhs_vector
from .grammar import (
    CnfGrammar,
    Grammar,
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
from .linalg import Factorization, SingularMatrixError, lu_factor, lu_solve, spectral_radius_estimate
from .ngrams import BOS, EOS, CountMergeSpec, NGramTable, build_table, export_arpa, merge_counts, read_arpa, read_counts
from .sampling import SampleBatch, empirical_ngrams, sample_batch, sample_sentence
from .substrings import CornerSystem, PrefixTable, corner_probs, mirror, prefix_probs, suffix_probs

__version__ = "0.1.0"
