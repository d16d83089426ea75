"""LLR-based dynamic ordering and the ordered IMF-SIC detector."""

from __future__ import annotations

import numpy as np

from .._validation import check_constellation, check_noise
from ..numerics import as_complex_matrix, as_complex_vector, hermitian_solve
from ..signal_model import Constellation, NoiseModel
from .base import DetectionResult, DetectorConfig, OrderingState
from .linear import mmse_filter_column
from .sic import run_branching

__all__ = ["llr_metric", "llr_order", "detect_oimf_sic"]

_LEVERAGE_FLOOR = 1e-12


def llr_metric(z: complex, h_col, r) -> float:
    """``|z| / (1 - h^H R^{-1} h)`` for a soft estimate ``z`` of column ``h``."""
    h_col = as_complex_vector(h_col, "h_col")
    g = 1.0 - np.vdot(h_col, hermitian_solve(r, h_col)).real
    if abs(g) < _LEVERAGE_FLOOR:
        raise ValueError("degenerate leverage: 1 - h^H R^{-1} h is numerically zero")
    return abs(z) / g


def llr_order(y_current, h, b: OrderingState, nm: NoiseModel, c: Constellation,
              fixed_r: bool = False) -> OrderingState:
    """Rank the undetected layers ``b.b`` by LLR metric, largest first.

    ``h`` is the full channel; only the columns listed in ``b.b`` take part
    in the filters and in ``R = H_rem H_rem^H + sigma2 I`` (all columns when
    ``fixed_r``). Ties keep the lower index first.
    """
    h = as_complex_matrix(h, "h")
    y_current = as_complex_vector(y_current, "y_current")
    nm = check_noise(nm)
    c = check_constellation(c)
    remaining = sorted(b.b)
    if not remaining:
        raise ValueError("ordering state is empty")
    h_rem = h[:, remaining]
    h_cov = h if fixed_r else h_rem
    r = h_cov @ h_cov.conj().T + nm.sigma2 * np.eye(h.shape[0])
    metric = {}
    for pos, j in enumerate(remaining):
        w = mmse_filter_column(h_rem, pos, nm, c)
        z = np.vdot(w, y_current)
        metric[j] = llr_metric(z, h[:, j], r)
    t = sorted(remaining, key=lambda j: -metric[j])
    return OrderingState(tuple(remaining), tuple(t))


def detect_oimf_sic(y, h, c: Constellation, nm: NoiseModel, cfg: DetectorConfig) -> DetectionResult:
    """IMF-SIC with the detection order recomputed by LLR after every decision,
    both in the main cascade and inside every branch."""
    return run_branching(y, h, c, nm, cfg, ordered=True)
