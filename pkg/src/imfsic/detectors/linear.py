"""Zero-forcing and MMSE linear detectors and the per-layer MMSE filter."""

from __future__ import annotations

import numpy as np

from .._validation import check_constellation, check_noise, check_system
from ..numerics import NotPositiveDefiniteError, as_complex_matrix, hermitian_solve
from ..signal_model import Constellation, NoiseModel
from ._kernels import nearest_index
from .base import DetectionResult

__all__ = ["zf_soft", "mmse_soft", "detect_zf", "detect_mmse", "mmse_filter_column"]


def zf_soft(y: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Unquantised ZF output ``(H^H H)^{-1} H^H y``."""
    hh = h.conj().T
    try:
        return hermitian_solve(hh @ h, hh @ y)
    except NotPositiveDefiniteError as exc:
        raise np.linalg.LinAlgError("channel matrix is rank deficient; ZF is undefined") from exc


def mmse_soft(y: np.ndarray, h: np.ndarray, reg: float) -> np.ndarray:
    """Unquantised MMSE output ``(H^H H + reg I)^{-1} H^H y`` with ``reg = sigma2 / Es``."""
    hh = h.conj().T
    gram = hh @ h + reg * np.eye(h.shape[1])
    return hermitian_solve(gram, hh @ y)


def _hard(soft: np.ndarray, c: Constellation) -> DetectionResult:
    idx = np.array([nearest_index(z, c.points) for z in soft], dtype=np.int64)
    return DetectionResult(symbols=c.points[idx], indices=idx, stats={"soft": soft})


def detect_zf(y, h, c: Constellation, nm: NoiseModel | None = None) -> DetectionResult:
    y, h = check_system(y, h)
    return _hard(zf_soft(y, h), check_constellation(c))


def detect_mmse(y, h, c: Constellation, nm: NoiseModel) -> DetectionResult:
    y, h = check_system(y, h)
    c = check_constellation(c)
    return _hard(mmse_soft(y, h, check_noise(nm).sigma2 / c.es), c)


def mmse_filter_column(h_remaining, target_col: int, nm: NoiseModel, c: Constellation) -> np.ndarray:
    """MMSE nulling vector for one layer against the columns still undetected.

    Solves ``(H_rem H_rem^H + (sigma2/Es) I) w = h_target``.
    """
    h_remaining = as_complex_matrix(h_remaining, "h_remaining")
    if h_remaining.shape[1] == 0:
        raise ValueError("h_remaining has no columns")
    if not 0 <= target_col < h_remaining.shape[1]:
        raise IndexError(f"target_col {target_col} out of range")
    reg = check_noise(nm).sigma2 / c.es
    r = h_remaining @ h_remaining.conj().T + reg * np.eye(h_remaining.shape[0])
    return hermitian_solve(r, h_remaining[:, target_col])
