"""Grammar consistency from the spectral radius of the expectancy matrix."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grammar import CnfGrammar
from .linalg import spectral_radius_estimate

DEFAULT_MARGIN = 1e-6

CONSISTENT = "consistent"
INCONSISTENT = "inconsistent"
BORDERLINE = "borderline"


class InconsistentGrammarError(ArithmeticError):
    def __init__(self, report: "ConsistencyReport"):
        super().__init__(
            f"grammar is {report.verdict} (spectral radius {report.spectral_radius:.9g})"
        )
        self.report = report


@dataclass(frozen=True)
class ConsistencyReport:
    spectral_radius: float
    verdict: str
    iterations: int

    @property
    def consistent(self) -> bool:
        return self.verdict == CONSISTENT

    def to_dict(self) -> dict:
        return {
            "spectral_radius": self.spectral_radius,
            "verdict": self.verdict,
            "iterations": self.iterations,
        }


def expectancy_matrix(g: CnfGrammar) -> np.ndarray:
    """e[X, Y]: expected number of Y's in one expansion of X."""
    n = g.n_nonterminals
    lhs, left, right, prob = g.binary_arrays
    e = np.zeros((n, n))
    np.add.at(e, (lhs, left), prob)
    np.add.at(e, (lhs, right), prob)
    return e


def check_consistency(g: CnfGrammar, margin: float = DEFAULT_MARGIN) -> ConsistencyReport:
    """Consistent iff rho(E) < 1 - margin.

    A power iteration that fails to converge yields ``borderline`` instead of
    a guess.
    """
    est = spectral_radius_estimate(expectancy_matrix(g))
    if not est.converged:
        verdict = BORDERLINE
    elif est.radius < 1.0 - margin:
        verdict = CONSISTENT
    else:
        verdict = INCONSISTENT
    return ConsistencyReport(est.radius, verdict, est.iterations)


def require_consistent(g: CnfGrammar, margin: float = DEFAULT_MARGIN) -> ConsistencyReport:
    report = check_consistency(g, margin)
    if not report.consistent:
        raise InconsistentGrammarError(report)
    return report
