"""Dense complex linear-algebra helpers shared by all estimators.

Matrices are 2-D ``numpy.ndarray`` with complex double entries, vectors
are 1-D.  Vectorization is column-major: entry ``(i, j)`` of an ``m x n``
matrix lands at flat position ``j*m + i`` and ``devec`` is the exact
inverse.  Every routine here is pure and single-threaded.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

# Max absolute deviation from Q == Q^H tolerated before refusing to solve.
HERMITIAN_TOL = 1e-10
# Condition-number estimate above which a system is treated as singular.
CONDITION_LIMIT = 1e12


class DimensionMismatch(ValueError):
    """Operands have incompatible shapes."""


class SingularSystemError(np.linalg.LinAlgError):
    """Linear system is numerically singular or not positive definite."""


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product ``a (x) b``."""
    return np.kron(np.asarray(a), np.asarray(b))


def khatri_rao(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Column-wise Kronecker product of matrices with equal column counts."""
    a = np.atleast_2d(np.asarray(a))
    b = np.atleast_2d(np.asarray(b))
    if a.shape[1] != b.shape[1]:
        raise DimensionMismatch(
            f"khatri_rao needs equal column counts, got {a.shape[1]} and {b.shape[1]}"
        )
    return scipy.linalg.khatri_rao(a, b)


def vec(m: np.ndarray) -> np.ndarray:
    """Stack the columns of a matrix into one 1-D vector."""
    return np.asarray(m).reshape(-1, order="F")


def devec(v: np.ndarray, rows: int, cols: int) -> np.ndarray:
    """Inverse of :func:`vec`: reshape a vector into a ``rows x cols`` matrix."""
    v = np.asarray(v).reshape(-1)
    if v.size != rows * cols:
        raise DimensionMismatch(f"cannot devec length {v.size} into {rows}x{cols}")
    return v.reshape((rows, cols), order="F")


def mat_inner(x: np.ndarray, a: np.ndarray) -> complex:
    """Frobenius inner product ``tr(x a^H) = sum_ij x[i,j] * conj(a[i,j])``."""
    x = np.asarray(x)
    a = np.asarray(a)
    if x.shape != a.shape:
        raise DimensionMismatch(f"shape mismatch {x.shape} vs {a.shape}")
    return complex(np.vdot(a, x))


def hermitian_solve(q: np.ndarray, g: np.ndarray, context: str = "") -> np.ndarray:
    """Solve ``q @ z = g`` for Hermitian positive-definite ``q``.

    ``g`` may be a vector or a matrix of stacked right-hand sides.  ``q``
    is checked against :data:`HERMITIAN_TOL`, symmetrized, and factored by
    Cholesky; a failed factorization or a condition estimate beyond
    :data:`CONDITION_LIMIT` raises :class:`SingularSystemError` with
    ``context`` included so callers can name the offending step.
    """
    q = np.asarray(q, dtype=np.complex128)
    g = np.asarray(g, dtype=np.complex128)
    if q.ndim != 2 or q.shape[0] != q.shape[1]:
        raise DimensionMismatch(f"expected a square system matrix, got {q.shape}")
    if g.shape[0] != q.shape[0]:
        raise DimensionMismatch(
            f"right-hand side length {g.shape[0]} does not match system size {q.shape[0]}"
        )
    deviation = float(np.max(np.abs(q - q.conj().T)))
    if deviation > HERMITIAN_TOL:
        raise ValueError(
            _with_context(f"matrix is not Hermitian (max deviation {deviation:.3e})", context)
        )
    qh = (q + q.conj().T) / 2.0
    try:
        factor = scipy.linalg.cho_factor(qh, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(
            _with_context("system matrix is not positive definite", context)
        ) from exc
    (pocon,) = scipy.linalg.get_lapack_funcs(("pocon",), (qh,))
    anorm = np.linalg.norm(qh, 1)
    rcond, _ = pocon(factor[0], anorm, uplo=b"L" if factor[1] else b"U")
    if rcond <= 0.0 or 1.0 / rcond > CONDITION_LIMIT:
        raise SingularSystemError(
            _with_context(
                f"system matrix is numerically singular (condition estimate {1.0 / max(rcond, 1e-300):.3e})",
                context,
            )
        )
    return scipy.linalg.cho_solve(factor, g, check_finite=False)


def _with_context(message: str, context: str) -> str:
    return f"{message} [{context}]" if context else message
