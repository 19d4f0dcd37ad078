"""Dense small-matrix helpers: sign-fixed QR, triangular solves, column scaling.

The QR convention here forces a strictly positive R diagonal, which makes the
factorization unique and the recorded R history reproducible run to run.
"""

from __future__ import annotations

import sys as _sys

import numpy as np
import scipy.linalg

from .errors import (
    ArgumentError,
    DegenerateCoefficientError,
    DegenerateFrameError,
    SingularSolveError,
)

Array = np.ndarray

# |R_ii| below this is treated as a collapsed tangent volume.
DEGENERACY_FLOOR = 1e-30
# Column norms below this cannot be safely normalized.
COLUMN_FLOOR = 1e-300
_TINY = _sys.float_info.min  # smallest normal double


def _square(M, what: str) -> Array:
    A = np.asarray(M, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
        raise ArgumentError(f"{what} must be a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ArgumentError(f"{what} contains non-finite entries")
    return A


def qr_positive(M) -> tuple[Array, Array]:
    """QR factorization with the diagonal of R forced positive.

    Householder factorization via LAPACK, then matched column/row sign flips;
    the result is the unique factorization M = Q R with R_ii > 0.
    """
    A = _square(M, "QR input")
    Q, R = np.linalg.qr(A)
    d = np.diagonal(R)
    bad = np.nonzero(np.abs(d) < DEGENERACY_FLOOR)[0]
    if bad.size:
        j = int(bad[0]) + 1
        raise DegenerateFrameError(
            f"tangent volume collapsed: |R| diagonal entry {j} is {abs(d[j - 1]):.3e}"
        )
    s = np.where(d < 0.0, -1.0, 1.0)
    return Q * s, s[:, None] * R


def solve_upper(R, B) -> Array:
    """Solve R X = B for upper-triangular R by back-substitution.

    Never forms the inverse. If B is upper triangular the result is upper
    triangular with exact zeros below the diagonal.
    """
    Ru = _square(R, "triangular factor")
    if np.any(np.tril(Ru, -1) != 0.0):
        raise ArgumentError("triangular factor has nonzeros below the diagonal")
    d = np.abs(np.diagonal(Ru))
    bad = np.nonzero(d < _TINY)[0]
    if bad.size:
        j = int(bad[0]) + 1
        raise SingularSolveError(
            f"diagonal entry {j} of the triangular factor is zero or denormal ({d[j - 1]:.3e})"
        )
    Bm = np.asarray(B, dtype=float)
    return scipy.linalg.solve_triangular(Ru, Bm, lower=False, check_finite=False)


def normalize_columns(M) -> tuple[Array, Array]:
    """Scale each column to unit Euclidean norm; returns (scaled, norms)."""
    A = np.asarray(M, dtype=float)
    norms = np.sqrt(np.einsum("ij,ij->j", A, A))
    bad = np.nonzero(norms < COLUMN_FLOOR)[0]
    if bad.size:
        j = int(bad[0]) + 1
        raise DegenerateCoefficientError(f"column {j} has vanishing norm ({norms[j - 1]:.3e})")
    return A / norms, norms


def is_orthogonal(Q, tol: float = 1e-10) -> bool:
    A = np.asarray(Q, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        return False
    return float(np.max(np.abs(A.T @ A - np.eye(A.shape[0])))) <= tol


def is_upper_triangular(M) -> bool:
    A = np.asarray(M, dtype=float)
    return A.ndim == 2 and bool(np.all(np.tril(A, -1) == 0.0))


def identity_frame(n: int) -> Array:
    if n < 1:
        raise ArgumentError(f"dimension must be >= 1, got {n}")
    return np.eye(n)


def random_orthogonal(n: int, seed: int) -> Array:
    """Orthogonal matrix from the sign-fixed QR of a seeded Gaussian matrix."""
    if n < 1:
        raise ArgumentError(f"dimension must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    Q, _ = qr_positive(rng.standard_normal((n, n)))
    return Q
