"""Successive interference cancellation and its multiple-feedback extensions."""

from __future__ import annotations

import numpy as np

from .._validation import check_constellation, check_noise, check_system
from ..signal_model import Constellation, NoiseModel
from . import _kernels as K
from .base import CandidateSet, DetectionResult, DetectorConfig

__all__ = [
    "sic_pass",
    "detect_sic",
    "detect_mf_sic",
    "imf_subroutine",
    "detect_imf_sic",
    "run_branching",
]


def _stats_dict(stats: np.ndarray) -> dict:
    return {
        "sac_triggers": int(stats[K.SAC_TRIGGERS]),
        "max_depth": int(stats[K.MAX_DEPTH]),
        "candidate_evaluations": int(stats[K.CANDIDATE_EVALS]),
    }


def _result(idx, c, stats=None, rec=None) -> DetectionResult:
    sets = ()
    if rec is not None:
        layers, syms, res, n = rec
        sets = tuple(
            CandidateSet(int(layers[i]), c.points[syms[i]], res[i].copy()) for i in range(n)
        )
    return DetectionResult(
        symbols=c.points[idx],
        indices=np.asarray(idx),
        stats=_stats_dict(stats) if stats is not None else {},
        candidate_sets=sets,
    )


def _record_buffers(nt: int, s: int):
    return (
        np.zeros(3, dtype=np.int64),
        np.full(nt, -1, dtype=np.int64),
        np.zeros((nt, s, nt), dtype=np.int64),
        np.full((nt, s), np.inf),
    )


def sic_pass(y, h, c: Constellation, nm: NoiseModel, order=None) -> DetectionResult:
    """One SIC cascade along ``order`` (natural order when omitted).

    Each step nulls the not-yet-detected layers with the MMSE filter,
    quantises, and cancels the decided symbol from the received vector.
    """
    y, h = check_system(y, h)
    c = check_constellation(c)
    nt = h.shape[1]
    order = np.arange(nt) if order is None else np.asarray(order, dtype=np.int64)
    if sorted(order.tolist()) != list(range(nt)):
        raise ValueError(f"order must be a permutation of 0..{nt - 1}, got {order.tolist()}")
    idx = K.sic_pass(y, h, c.points, check_noise(nm).sigma2 / c.es, order)
    return _result(idx, c)


def detect_sic(y, h, c: Constellation, nm: NoiseModel) -> DetectionResult:
    return sic_pass(y, h, c, nm)


def detect_mf_sic(y, h, c: Constellation, nm: NoiseModel, cfg: DetectorConfig) -> DetectionResult:
    """MF-SIC: on an unreliable layer, try ``cfg.s`` neighbouring points, finish
    each branch with plain SIC, keep the one with the smallest full residual."""
    y, h = check_system(y, h)
    c = check_constellation(c)
    cfg.validate(c)
    nm = check_noise(nm)
    stats, layers, syms, res = _record_buffers(h.shape[1], cfg.s)
    idx = K.mf_sic(y, h, c.points, nm.sigma2 / c.es, cfg.d_th, cfg.s, stats, layers, syms, res)
    return _result(idx, c, stats, (layers, syms, res, int(np.sum(layers >= 0))))


def run_branching(y, h, c: Constellation, nm: NoiseModel, cfg: DetectorConfig, ordered: bool):
    """Shared driver for the recursive detectors; returns a :class:`DetectionResult`."""
    y, h = check_system(y, h)
    c = check_constellation(c)
    cfg.validate(c)
    nm = check_noise(nm)
    stats, layers, syms, res = _record_buffers(h.shape[1], cfg.s)
    idx = K.imf_sic(
        y, h, c.points, nm.sigma2 / c.es, nm.sigma2, cfg.d_th, cfg.s, cfg.l,
        ordered, cfg.fixed_r, stats, layers, syms, res,
    )
    return _result(idx, c, stats, (layers, syms, res, int(np.sum(layers >= 0))))


def detect_imf_sic(y, h, c: Constellation, nm: NoiseModel, cfg: DetectorConfig) -> DetectionResult:
    """IMF-SIC: MF-SIC whose branches re-test reliability and nest up to ``cfg.l`` levels."""
    return run_branching(y, h, c, nm, cfg, ordered=False)


def imf_subroutine(
    y_partial,
    h_partial,
    c: Constellation,
    nm: NoiseModel,
    layer: int,
    z_soft: complex,
    cfg: DetectorConfig,
    depth: int,
    ordered: bool = False,
) -> complex:
    """Branch search for one unreliable layer of a partially cancelled system.

    ``y_partial`` must already have the detected layers cancelled and
    ``h_partial`` holds only the undetected columns; ``layer`` indexes the
    column being decided. Inner unreliable decisions recurse while
    ``depth > 0``; with ``depth = 0`` this is the MF-SIC inner loop. Since
    the detected prefix is cancelled out of ``y_partial``, the partial
    residual ranks branches exactly as the full one does.
    """
    y, h = check_system(y_partial, h_partial)
    c = check_constellation(c)
    cfg.validate(c)
    nm = check_noise(nm)
    if depth < 0:
        raise ValueError("depth must be >= 0")
    if not 0 <= layer < h.shape[1]:
        raise IndexError(f"layer {layer} out of range")
    stats, _, syms, res = _record_buffers(h.shape[1], cfg.s)
    q = K.subroutine_entry(
        y, h, c.points, layer, complex(z_soft), depth, nm.sigma2 / c.es, nm.sigma2,
        cfg.d_th, cfg.s, ordered, cfg.fixed_r, stats, syms, res,
    )
    return complex(c.points[q])
