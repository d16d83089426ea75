"""MIMO symbol-vector detectors: ML, ZF, MMSE, SIC, MF-SIC, IMF-SIC, OIMF-SIC."""

from __future__ import annotations

import numpy as np

from ..signal_model import Constellation, NoiseModel
from . import _kernels
from .base import (
    KINDS,
    CandidateSet,
    DetectionResult,
    DetectorConfig,
    OrderingState,
    SoftDecision,
    sac_check,
)
from .linear import detect_mmse, detect_zf, mmse_filter_column, mmse_soft, zf_soft
from .ml import ML_MAX_CANDIDATES, SearchSpaceTooLarge, detect_ml, ml_indices, search_space_size
from .ordering import detect_oimf_sic, llr_metric, llr_order
from .sic import detect_imf_sic, detect_mf_sic, detect_sic, imf_subroutine, sic_pass

__all__ = [
    "KINDS",
    "CandidateSet",
    "DetectionResult",
    "DetectorConfig",
    "OrderingState",
    "SoftDecision",
    "SearchSpaceTooLarge",
    "ML_MAX_CANDIDATES",
    "sac_check",
    "detect",
    "detect_indices",
    "detect_ml",
    "detect_zf",
    "detect_mmse",
    "mmse_filter_column",
    "sic_pass",
    "detect_sic",
    "detect_mf_sic",
    "imf_subroutine",
    "detect_imf_sic",
    "llr_metric",
    "llr_order",
    "detect_oimf_sic",
    "search_space_size",
]


def detect(y, h, c: Constellation, nm: NoiseModel, cfg: DetectorConfig | str) -> DetectionResult:
    """Run the detector named by ``cfg`` on one received vector."""
    if isinstance(cfg, str):
        cfg = DetectorConfig(cfg)
    kind = cfg.kind
    if kind == "ml":
        return detect_ml(y, h, c)
    if kind == "zf":
        return detect_zf(y, h, c, nm)
    if kind == "mmse":
        return detect_mmse(y, h, c, nm)
    if kind == "sic":
        return detect_sic(y, h, c, nm)
    if kind == "mf-sic":
        return detect_mf_sic(y, h, c, nm, cfg)
    if kind == "imf-sic":
        return detect_imf_sic(y, h, c, nm, cfg)
    return detect_oimf_sic(y, h, c, nm, cfg)


def _quantize_all(soft: np.ndarray, points: np.ndarray) -> np.ndarray:
    d = np.abs(soft[:, None] - points[None, :]) ** 2
    return np.argmin(d, axis=1)


def detect_indices(cfg: DetectorConfig, y: np.ndarray, h: np.ndarray, c: Constellation,
                   sigma2: float, ml_budget: int = ML_MAX_CANDIDATES):
    """Unchecked fast path used by the Monte-Carlo harness.

    Inputs must already be contiguous ``complex128`` arrays of matching
    shape. Returns ``(indices, stats)`` where ``stats`` is a length-3 counter
    array (zeros for detectors without a branching search).
    """
    kind = cfg.kind
    pts = c.points
    reg = sigma2 / c.es
    stats = np.zeros(3, dtype=np.int64)
    if kind == "ml":
        return ml_indices(y, h, pts, ml_budget)[0], stats
    if kind == "zf":
        return _quantize_all(zf_soft(y, h), pts), stats
    if kind == "mmse":
        return _quantize_all(mmse_soft(y, h, reg), pts), stats
    nt = h.shape[1]
    if kind == "sic":
        return _kernels.sic_pass(y, h, pts, reg, np.arange(nt)), stats
    layers = np.empty(nt, dtype=np.int64)
    syms = np.empty((nt, cfg.s, nt), dtype=np.int64)
    res = np.empty((nt, cfg.s))
    if kind == "mf-sic":
        idx = _kernels.mf_sic(y, h, pts, reg, cfg.d_th, cfg.s, stats, layers, syms, res)
    else:
        idx = _kernels.imf_sic(y, h, pts, reg, sigma2, cfg.d_th, cfg.s, cfg.l,
                               kind == "oimf-sic", cfg.fixed_r, stats, layers, syms, res)
    return idx, stats
