"""Seeded Monte-Carlo BER engine.

Every trial draws its own channel, frame and noise from Philox streams
keyed by ``(base_seed, snr_index, trial_id)``. All configured detectors
see that same realisation. Per-point totals are integer sums, so results
do not depend on how trials are split across worker processes.
"""

from __future__ import annotations

import logging
import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from .detectors import (
    DetectorConfig,
    detect_indices,
    search_space_size,
)
from .detectors import _kernels
from .signal_model import (
    Constellation,
    RngStream,
    SystemDims,
    build_qam,
    generate_channel,
    generate_noise,
    random_frame,
    snr_to_sigma2,
)

__all__ = [
    "HARNESS_ML_BUDGET",
    "SweepConfig",
    "TrialOutcome",
    "BerPoint",
    "BerCurve",
    "wilson_interval",
    "run_trial",
    "run_sweep",
    "snr_at_ber",
    "snr_gain_at_ber",
    "snr_gaps",
    "worker_count",
]

log = logging.getLogger(__name__)

# exhaustive ML is skipped in sweeps above this many candidates per trial
HARNESS_ML_BUDGET = 2**20
_Z95 = 1.959963984540054


@dataclass(frozen=True)
class SweepConfig:
    dims: SystemDims
    m: int
    detectors: tuple[DetectorConfig, ...]
    snr_grid_db: tuple[float, ...]
    trials: int
    base_seed: int = 0
    noiseless: bool = False
    ml_budget: int = HARNESS_ML_BUDGET

    def __post_init__(self):
        object.__setattr__(self, "detectors", tuple(self.detectors))
        object.__setattr__(self, "snr_grid_db", tuple(float(s) for s in self.snr_grid_db))
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.snr_grid_db:
            raise ValueError("snr grid is empty")
        if any(b <= a for a, b in zip(self.snr_grid_db, self.snr_grid_db[1:])):
            raise ValueError("snr grid must be strictly increasing")
        kinds = [d.kind for d in self.detectors]
        if not kinds:
            raise ValueError("no detectors configured")
        if len(set(kinds)) != len(kinds):
            raise ValueError("at most one configuration per detector kind")
        c = build_qam(self.m)
        for d in self.detectors:
            d.validate(c)

    @property
    def constellation(self) -> Constellation:
        return build_qam(self.m)

    def active_detectors(self) -> tuple[DetectorConfig, ...]:
        """Configured detectors minus ML when its search space exceeds ``ml_budget``."""
        out = []
        for d in self.detectors:
            if d.kind == "ml" and search_space_size(self.m, self.dims.nt) > self.ml_budget:
                warnings.warn(
                    f"ML excluded: M^Nt = {self.m}^{self.dims.nt} exceeds the enumeration "
                    f"budget of {self.ml_budget}",
                    RuntimeWarning,
                    stacklevel=2,
                )
                continue
            out.append(d)
        return tuple(out)

    def to_dict(self) -> dict:
        return {
            "nt": self.dims.nt,
            "nr": self.dims.nr,
            "m": self.m,
            "detectors": [asdict(d) for d in self.detectors],
            "snr_grid_db": list(self.snr_grid_db),
            "trials": self.trials,
            "base_seed": self.base_seed,
            "noiseless": self.noiseless,
            "ml_budget": self.ml_budget,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SweepConfig":
        return cls(
            dims=SystemDims(int(d["nt"]), int(d["nr"])),
            m=int(d["m"]),
            detectors=tuple(DetectorConfig(**x) for x in d["detectors"]),
            snr_grid_db=tuple(d["snr_grid_db"]),
            trials=int(d["trials"]),
            base_seed=int(d["base_seed"]),
            noiseless=bool(d.get("noiseless", False)),
            ml_budget=int(d.get("ml_budget", HARNESS_ML_BUDGET)),
        )


@dataclass(frozen=True)
class TrialOutcome:
    trial_id: int
    snr_index: int
    errors: dict
    stats: dict
    residuals: dict


def wilson_interval(errors: int, n: int, z: float = _Z95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if n <= 0:
        raise ValueError("n must be positive")
    p = errors / n
    z2 = z * z
    denom = 1.0 + z2 / n
    centre = (p + z2 / (2 * n)) / denom
    half = z / denom * math.sqrt(p * (1 - p) / n + z2 / (4 * n * n))
    lo = 0.0 if errors == 0 else max(0.0, centre - half)
    hi = 1.0 if errors == n else min(1.0, centre + half)
    return lo, hi


@dataclass(frozen=True)
class BerPoint:
    snr_db: float
    trials: int
    total_bits: int
    bit_errors: int

    @property
    def ber(self) -> float:
        return self.bit_errors / self.total_bits

    @property
    def ci(self) -> tuple[float, float]:
        return wilson_interval(self.bit_errors, self.total_bits)


@dataclass(frozen=True)
class BerCurve:
    detector: str
    points: tuple[BerPoint, ...]
    diagnostics: dict = field(default_factory=dict, compare=False)

    @property
    def snr_db(self) -> np.ndarray:
        return np.array([p.snr_db for p in self.points])

    @property
    def ber(self) -> np.ndarray:
        return np.array([p.ber for p in self.points])


def _draw(cfg: SweepConfig, c: Constellation, snr_index: int, trial_id: int):
    stream = RngStream(cfg.base_seed, (snr_index, trial_id))
    h = generate_channel(cfg.dims, stream.child(0))
    frame = random_frame(cfg.dims, c, stream.child(1))
    nm = snr_to_sigma2(cfg.snr_grid_db[snr_index], cfg.dims, c)
    y = h @ frame.symbols
    if not cfg.noiseless:
        y = y + generate_noise(cfg.dims, nm, stream.child(2))
    return h, frame, y, nm


def run_trial(cfg: SweepConfig, snr_index: int, trial_id: int,
              detectors: Sequence[DetectorConfig] | None = None) -> TrialOutcome:
    """One channel/frame/noise realisation pushed through every detector."""
    c = cfg.constellation
    detectors = cfg.active_detectors() if detectors is None else detectors
    h, frame, y, nm = _draw(cfg, c, snr_index, trial_id)
    errors, stats, residuals = {}, {}, {}
    for d in detectors:
        try:
            idx, st = detect_indices(d, y, h, c, nm.sigma2, cfg.ml_budget)
        except Exception as exc:
            raise RuntimeError(
                f"{d.kind} failed at snr index {snr_index}, trial {trial_id}: {exc}"
            ) from exc
        errors[d.kind] = int(np.count_nonzero(c.bit_table[idx] != c.bit_table[frame.indices]))
        stats[d.kind] = st
        r = y - h @ c.points[idx]
        residuals[d.kind] = float(np.vdot(r, r).real)
    return TrialOutcome(trial_id, snr_index, errors, stats, residuals)


def _run_block(cfg: SweepConfig, detectors, snr_index: int, start: int, stop: int):
    n_det = len(detectors)
    errs = np.zeros(n_det, dtype=np.int64)
    stats = np.zeros((n_det, 3), dtype=np.int64)
    for t in range(start, stop):
        out = run_trial(cfg, snr_index, t, detectors)
        for i, d in enumerate(detectors):
            errs[i] += out.errors[d.kind]
            st = out.stats[d.kind]
            stats[i, 0] += st[_kernels.SAC_TRIGGERS]
            stats[i, 1] = max(stats[i, 1], st[_kernels.MAX_DEPTH])
            stats[i, 2] += st[_kernels.CANDIDATE_EVALS]
    return snr_index, errs, stats


def worker_count() -> int:
    """Worker processes from ``MIMO_SIC_THREADS`` (unset or 0 means one per CPU)."""
    raw = os.environ.get("MIMO_SIC_THREADS", "0").strip() or "0"
    n = int(raw)
    if n < 0:
        raise ValueError("MIMO_SIC_THREADS must be >= 0")
    return n if n > 0 else (os.cpu_count() or 1)


def _blocks(cfg: SweepConfig, size: int) -> Iterable[tuple[int, int, int]]:
    for i in range(len(cfg.snr_grid_db)):
        for start in range(0, cfg.trials, size):
            yield i, start, min(start + size, cfg.trials)


def run_sweep(cfg: SweepConfig, workers: int | None = None, block: int = 500) -> list[BerCurve]:
    """BER curves for every active detector over the SNR grid."""
    detectors = cfg.active_detectors()
    workers = worker_count() if workers is None else workers
    n_snr = len(cfg.snr_grid_db)
    errs = np.zeros((n_snr, len(detectors)), dtype=np.int64)
    stats = np.zeros((n_snr, len(detectors), 3), dtype=np.int64)

    def absorb(result):
        i, e, s = result
        errs[i] += e
        stats[i, :, 0] += s[:, 0]
        stats[i, :, 1] = np.maximum(stats[i, :, 1], s[:, 1])
        stats[i, :, 2] += s[:, 2]

    jobs = list(_blocks(cfg, block))
    if workers <= 1 or len(jobs) == 1:
        for i, start, stop in jobs:
            absorb(_run_block(cfg, detectors, i, start, stop))
            log.debug("snr %.1f dB: trials %d-%d done", cfg.snr_grid_db[i], start, stop)
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_block, cfg, detectors, *job) for job in jobs]
            for f in futures:
                absorb(f.result())

    bits = cfg.dims.nt * build_qam(cfg.m).bits_per_symbol * cfg.trials
    curves = []
    for j, d in enumerate(detectors):
        points = tuple(
            BerPoint(cfg.snr_grid_db[i], cfg.trials, bits, int(errs[i, j])) for i in range(n_snr)
        )
        diag = {
            "sac_triggers": stats[:, j, 0].tolist(),
            "max_depth": stats[:, j, 1].tolist(),
            "candidate_evaluations": stats[:, j, 2].tolist(),
        }
        curves.append(BerCurve(d.kind, points, diag))
    return curves


def _log_ber(p: BerPoint) -> float:
    # zero-error points are placed at half an error so the log stays finite
    return math.log10(max(p.bit_errors, 0.5) / p.total_bits)


def snr_at_ber(curve: BerCurve, target_ber: float) -> float:
    """SNR where the curve first falls to ``target_ber`` (log-linear interpolation)."""
    if not 0 < target_ber < 1:
        raise ValueError("target_ber must lie in (0, 1)")
    pts = curve.points
    lt = math.log10(target_ber)
    for a, b in zip(pts, pts[1:]):
        la, lb = _log_ber(a), _log_ber(b)
        if la > lt >= lb:
            return a.snr_db + (la - lt) / (la - lb) * (b.snr_db - a.snr_db)
    raise ValueError(f"{curve.detector} curve does not cross BER {target_ber:g} within the grid")


def snr_gain_at_ber(curve_a: BerCurve, curve_b: BerCurve, target_ber: float) -> float:
    """SNR advantage of ``curve_a`` over ``curve_b`` at ``target_ber``, in dB."""
    return snr_at_ber(curve_b, target_ber) - snr_at_ber(curve_a, target_ber)


def snr_gaps(curve: BerCurve, reference: BerCurve, min_errors: int = 1) -> list[float | None]:
    """Horizontal distance in dB from ``reference`` at each grid point of ``curve``.

    For each point of ``curve`` the SNR at which ``reference`` reaches the
    same BER is interpolated; the gap is ``snr - snr_ref`` (positive means
    ``curve`` needs more SNR). Points with fewer than ``min_errors`` errors
    or whose BER falls outside the reference's measured range are ``None``.
    """
    ref = [p for p in reference.points if p.bit_errors > 0]
    gaps: list[float | None] = []
    for p in curve.points:
        if p.bit_errors < min_errors:
            gaps.append(None)
            continue
        lt = _log_ber(p)
        found = None
        for a, b in zip(ref, ref[1:]):
            la, lb = _log_ber(a), _log_ber(b)
            if la >= lt >= lb and la != lb:
                found = a.snr_db + (la - lt) / (la - lb) * (b.snr_db - a.snr_db)
                break
        gaps.append(None if found is None else p.snr_db - found)
    return gaps


def with_trials(cfg: SweepConfig, trials: int) -> SweepConfig:
    return replace(cfg, trials=trials)
