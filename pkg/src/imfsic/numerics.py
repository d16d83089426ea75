"""Small complex linear-algebra kernel shared by all detectors.

Matrices and vectors are plain ``complex128`` numpy arrays. Hermitian
positive-definite systems are solved through a pivot-free Cholesky
factorisation; no explicit inverse is ever formed.
"""

from __future__ import annotations

import numpy as np
from numba import njit

__all__ = [
    "NotPositiveDefiniteError",
    "as_complex_matrix",
    "as_complex_vector",
    "matmul",
    "conj_transpose",
    "hermitian_solve",
    "norm_sq",
]

# relative pivot floor below which a matrix is treated as numerically singular
PIVOT_RTOL = 1e-13


class NotPositiveDefiniteError(np.linalg.LinAlgError):
    """Raised when a Cholesky pivot is non-positive or numerically zero.

    Attributes
    ----------
    pivot : int
        Zero-based index of the failing diagonal pivot.
    """

    def __init__(self, pivot: int):
        super().__init__(f"matrix is not positive definite (failed at pivot {pivot})")
        self.pivot = pivot


def as_complex_matrix(a, name: str = "matrix") -> np.ndarray:
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite entries")
    return a


def as_complex_vector(v, name: str = "vector") -> np.ndarray:
    v = np.asarray(v, dtype=np.complex128)
    if v.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} contains non-finite entries")
    return v


def matmul(a, b) -> np.ndarray:
    a = as_complex_matrix(a, "a")
    b = as_complex_matrix(b, "b")
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"dimension mismatch: {a.shape} @ {b.shape}")
    return a @ b


def conj_transpose(a) -> np.ndarray:
    return as_complex_matrix(a).conj().T.copy()


def norm_sq(v) -> float:
    v = np.asarray(v, dtype=np.complex128)
    return float(np.sum(v.real * v.real + v.imag * v.imag))


@njit(cache=True)
def cholesky_factor(a):
    """Lower Cholesky factor of a Hermitian matrix.

    Returns ``(L, pivot)``; ``pivot`` is -1 on success, otherwise the index
    of the first pivot that is not safely positive.
    """
    n = a.shape[0]
    L = np.zeros((n, n), dtype=np.complex128)
    scale = 0.0
    for i in range(n):
        scale = max(scale, abs(a[i, i].real))
    floor = PIVOT_RTOL * n * scale
    for j in range(n):
        acc = a[j, j].real
        for k in range(j):
            acc -= L[j, k].real * L[j, k].real + L[j, k].imag * L[j, k].imag
        if not acc > floor:
            return L, j
        d = np.sqrt(acc)
        L[j, j] = d
        for i in range(j + 1, n):
            s = a[i, j]
            for k in range(j):
                s -= L[i, k] * np.conj(L[j, k])
            L[i, j] = s / d
    return L, -1


@njit(cache=True)
def cholesky_solve(L, b):
    """Solve ``(L L^H) X = B`` for a 2-D right-hand side ``B``."""
    n, m = b.shape
    x = np.empty((n, m), dtype=np.complex128)
    for c in range(m):
        # forward substitution with L
        for i in range(n):
            s = b[i, c]
            for k in range(i):
                s -= L[i, k] * x[k, c]
            x[i, c] = s / L[i, i]
        # back substitution with L^H
        for i in range(n - 1, -1, -1):
            s = x[i, c]
            for k in range(i + 1, n):
                s -= np.conj(L[k, i]) * x[k, c]
            x[i, c] = s / L[i, i].real
    return x


def hermitian_solve(a, b) -> np.ndarray:
    """Solve ``a @ x = b`` for Hermitian positive-definite ``a``.

    ``b`` may be a vector or a matrix of right-hand sides. Raises
    :class:`NotPositiveDefiniteError` with the failing pivot index if the
    factorisation breaks down.
    """
    a = as_complex_matrix(a, "a")
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError(f"a must be square, got shape {a.shape}")
    if not np.allclose(a, a.conj().T, rtol=1e-10, atol=1e-12 * max(np.abs(a).max(), 1.0)):
        raise ValueError("a is not Hermitian")
    b = np.asarray(b, dtype=np.complex128)
    if b.shape[0] != n:
        raise ValueError(f"dimension mismatch: a is {a.shape}, b is {b.shape}")
    L, pivot = cholesky_factor(np.ascontiguousarray(a))
    if pivot >= 0:
        raise NotPositiveDefiniteError(int(pivot))
    if b.ndim == 1:
        return cholesky_solve(L, np.ascontiguousarray(b[:, None]))[:, 0]
    return cholesky_solve(L, np.ascontiguousarray(b))
