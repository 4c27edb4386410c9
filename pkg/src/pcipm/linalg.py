"""Small dense solves used by the Newton flows and the static oracle.

Matrices are plain 2-D ``numpy`` arrays. Nothing here regularizes; a failed
factorization is reported with an exception and the caller decides what to do.
"""
import warnings

import numpy as np
from scipy import linalg as sla

from .errors import NotPositiveDefinite, Singular

SYMMETRY_TOL = 1e-10


def check_symmetric(A, tol=SYMMETRY_TOL):
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    scale = np.max(np.abs(A)) if A.size else 0.0
    if np.max(np.abs(A - A.T), initial=0.0) > tol * scale:
        raise ValueError("matrix is not symmetric")
    return A


def solve_spd(A, b):
    """Solve ``A x = b`` for symmetric positive definite ``A`` by Cholesky.

    Raises
    ------
    NotPositiveDefinite
        If a pivot is not strictly positive.
    """
    A = check_symmetric(A)
    b = np.asarray(b, dtype=float)
    try:
        factor = sla.cho_factor(A, lower=True, check_finite=True)
    except sla.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from None
    return sla.cho_solve(factor, b)


def solve_symmetric_indefinite(K, b):
    """Solve a symmetric, possibly indefinite system (e.g. a KKT saddle matrix).

    Uses LAPACK's Bunch-Kaufman ``sysv``. Exact singularity, or a reciprocal
    condition estimate below machine precision, raises :class:`Singular`.
    """
    K = check_symmetric(K)
    b = np.asarray(b, dtype=float)
    with warnings.catch_warnings():
        warnings.simplefilter("error", sla.LinAlgWarning)
        try:
            return sla.solve(K, b, assume_a="sym")
        except (sla.LinAlgError, sla.LinAlgWarning) as exc:
            raise Singular(str(exc)) from None


def solve_full_pivot(K, b):
    """Gaussian elimination with complete pivoting after symmetric row/column
    equilibration. Meant for small, badly scaled systems such as the
    trajectory-fitting KKT matrix.
    """
    K = np.asarray(K, dtype=float)
    b = np.asarray(b, dtype=float)
    rowmax = np.max(np.abs(K), axis=1)
    if np.any(rowmax == 0.0):
        raise Singular("zero row in system matrix")
    d = 1.0 / np.sqrt(rowmax)
    lu, ipiv, jpiv, info = sla.lapack.dgetc2(K * d[:, None] * d[None, :])
    if info > 0:
        raise Singular(f"zero pivot encountered at position {info}")
    y, scale = sla.lapack.dgesc2(lu, b * d, ipiv, jpiv)
    return d * y / scale
