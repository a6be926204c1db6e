"""Dense LU factorization with partial pivoting, and spectral radius estimation."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

PIVOT_TOLERANCE = 1e-12


class SingularMatrixError(ArithmeticError):
    pass


@dataclass(frozen=True, eq=False)
class Factorization:
    """Packed ``P A = L U``: unit-lower L below the diagonal, U on and above it.

    ``perm[i]`` is the row of the source matrix that ended up in row ``i``.
    """

    lu: np.ndarray
    perm: np.ndarray

    @property
    def dim(self) -> int:
        return self.lu.shape[0]

    def lower(self) -> np.ndarray:
        return np.tril(self.lu, -1) + np.eye(self.dim)

    def upper(self) -> np.ndarray:
        return np.triu(self.lu)

    def reconstruct(self) -> np.ndarray:
        m = np.empty_like(self.lu)
        m[self.perm] = self.lower() @ self.upper()
        return m


def lu_factor(m, tol: float = PIVOT_TOLERANCE) -> Factorization:
    a = np.array(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.isfinite(a).all():
        raise ValueError("matrix has non-finite entries")
    n = a.shape[0]
    perm = np.arange(n)
    for k in range(n):
        p = k + int(np.argmax(np.abs(a[k:, k])))
        if abs(a[p, k]) <= tol:
            raise SingularMatrixError(f"pivot {a[p, k]:.3g} at column {k} is below {tol:g}")
        if p != k:
            a[[k, p]] = a[[p, k]]
            perm[[k, p]] = perm[[p, k]]
        a[k + 1 :, k] /= a[k, k]
        a[k + 1 :, k + 1 :] -= np.outer(a[k + 1 :, k], a[k, k + 1 :])
    a.setflags(write=False)
    perm.setflags(write=False)
    return Factorization(a, perm)


def lu_solve(f: Factorization, rhs) -> np.ndarray:
    """Solve ``A x = rhs`` for a vector or for each column of a matrix.

    Substitution is column-oriented, so every entry of the result sees the
    same sequence of floating-point operations whether it was solved alone
    or as one column of a batch.
    """
    b = np.asarray(rhs, dtype=float)
    n = f.dim
    if b.shape[0] != n or b.ndim not in (1, 2):
        raise ValueError(f"right-hand side of shape {b.shape} does not match dimension {n}")
    lu = f.lu
    x = b[f.perm].copy()
    if b.ndim == 1:
        for k in range(n - 1):
            x[k + 1 :] -= lu[k + 1 :, k] * x[k]
        for k in range(n - 1, -1, -1):
            x[k] /= lu[k, k]
            x[:k] -= lu[:k, k] * x[k]
    else:
        for k in range(n - 1):
            x[k + 1 :] -= np.outer(lu[k + 1 :, k], x[k])
        for k in range(n - 1, -1, -1):
            x[k] /= lu[k, k]
            x[:k] -= np.outer(lu[:k, k], x[k])
    return x


class SpectralEstimate(NamedTuple):
    radius: float
    converged: bool
    iterations: int


def spectral_radius_estimate(m, tol: float = 1e-12, max_iter: int = 100) -> SpectralEstimate:
    """Perron root of a non-negative square matrix by power iteration.

    Iterates on ``B = M + I``, whose dominant eigenvalue is ``rho(M) + 1`` and
    strictly dominant in modulus even when ``M`` is periodic.  Each iteration
    squares the current power of ``B``, so iteration ``k`` applies ``B^(2^k)``
    to the all-ones vector; this keeps defective cases (nilpotent or Jordan
    blocks at the Perron root) from converging only like ``1/k``.
    """
    a = np.array(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if (a < 0).any():
        raise ValueError("power iteration needs a non-negative matrix")
    n = a.shape[0]
    if n == 0:
        return SpectralEstimate(0.0, True, 0)
    b = a + np.eye(n)
    power = b / b.max()
    ones = np.ones(n)
    prev = None
    est = 1.0
    for it in range(1, max_iter + 1):
        y = power @ ones
        est = float((b @ y).sum() / y.sum())
        if prev is not None and abs(est - prev) <= tol * max(1.0, est):
            return SpectralEstimate(max(est - 1.0, 0.0), True, it)
        prev = est
        power = power @ power
        power /= power.max()
    return SpectralEstimate(max(est - 1.0, 0.0), False, max_iter)
