"""Exhaustive maximum-likelihood search."""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .._validation import check_constellation, check_system
from ..signal_model import Constellation
from .base import DetectionResult

__all__ = ["ML_MAX_CANDIDATES", "SearchSpaceTooLarge", "search_space_size", "detect_ml", "ml_indices"]

ML_MAX_CANDIDATES = 2**32
_CHUNK = 2**16


class SearchSpaceTooLarge(ValueError):
    def __init__(self, size: int, budget: int):
        super().__init__(f"ML search over M^Nt = {size} candidates exceeds the budget of {budget}")
        self.size = size
        self.budget = budget


def search_space_size(m: int, nt: int) -> int:
    return int(m) ** int(nt)


@lru_cache(maxsize=8)
def _digits(m: int, nt: int, start: int, stop: int) -> np.ndarray:
    # first antenna is the most significant digit, so flat order is lexicographic
    flat = np.arange(start, stop, dtype=np.int64)
    out = np.empty((nt, flat.size), dtype=np.int64)
    for k in range(nt - 1, -1, -1):
        out[k] = flat % m
        flat //= m
    out.setflags(write=False)
    return out


def ml_indices(y: np.ndarray, h: np.ndarray, points: np.ndarray, budget: int = ML_MAX_CANDIDATES):
    """Alphabet indices of ``argmin ||y - H s||^2`` and the minimum residual.

    Ties resolve to the lexicographically smallest index vector.
    """
    m, nt = points.shape[0], h.shape[1]
    total = search_space_size(m, nt)
    if total > budget:
        raise SearchSpaceTooLarge(total, budget)
    best_res = np.inf
    best = None
    for start in range(0, total, _CHUNK):
        digits = _digits(m, nt, start, min(start + _CHUNK, total))
        r = y[:, None] - h @ points[digits]
        res = np.einsum("ij,ij->j", r.real, r.real) + np.einsum("ij,ij->j", r.imag, r.imag)
        j = int(np.argmin(res))
        if res[j] < best_res:
            best_res = float(res[j])
            best = digits[:, j].copy()
    return best, best_res


def detect_ml(y, h, c: Constellation, budget: int = ML_MAX_CANDIDATES) -> DetectionResult:
    y, h = check_system(y, h)
    c = check_constellation(c)
    idx, res = ml_indices(y, h, c.points, budget)
    return DetectionResult(
        symbols=c.points[idx],
        indices=idx,
        stats={"candidate_evaluations": search_space_size(c.size, h.shape[1]), "residual": res},
    )
