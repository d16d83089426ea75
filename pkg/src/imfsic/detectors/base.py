"""Shared detector types: configuration, results, and the reliability test."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..signal_model import Constellation, quantize

__all__ = [
    "KINDS",
    "DetectorConfig",
    "DetectionResult",
    "SoftDecision",
    "CandidateSet",
    "OrderingState",
    "sac_check",
]

KINDS = ("ml", "zf", "mmse", "sic", "mf-sic", "imf-sic", "oimf-sic")


def normalize_kind(kind: str) -> str:
    k = str(kind).strip().lower().replace("_", "-")
    if k not in KINDS:
        raise ValueError(f"unknown detector {kind!r}; choose from {', '.join(KINDS)}")
    return k


@dataclass(frozen=True)
class DetectorConfig:
    """Detector kind plus the multiple-feedback parameters.

    ``d_th`` is the reliability radius, ``s`` the number of candidate
    points fed back on an unreliable layer, ``l`` the nesting budget of the
    recursive search. ``fixed_r`` makes the LLR ordering use the covariance
    of the full channel instead of the remaining columns. Parameters a kind
    does not use are ignored.
    """

    kind: str
    d_th: float = 0.2
    s: int = 4
    l: int = 2
    fixed_r: bool = False

    def __post_init__(self):
        object.__setattr__(self, "kind", normalize_kind(self.kind))
        if not self.d_th >= 0:
            raise ValueError(f"d_th must be >= 0, got {self.d_th}")
        if int(self.s) != self.s or self.s < 1:
            raise ValueError(f"s must be a positive integer, got {self.s}")
        if int(self.l) != self.l or self.l < 1:
            raise ValueError(f"l must be a positive integer, got {self.l}")

    def validate(self, c: Constellation) -> "DetectorConfig":
        if self.s > c.size:
            raise ValueError(f"s={self.s} exceeds the constellation size {c.size}")
        return self

    @property
    def label(self) -> str:
        return self.kind.upper()


@dataclass(frozen=True)
class SoftDecision:
    z: complex
    d: float
    reliable: bool


def sac_check(z: complex, c: Constellation, d_th: float) -> SoftDecision:
    """Shadow-area test: reliable when the soft value lies within ``d_th`` of its hard decision."""
    if not d_th >= 0:
        raise ValueError(f"d_th must be >= 0, got {d_th}")
    d = abs(z - quantize(z, c))
    return SoftDecision(complex(z), float(d), bool(d <= d_th))


@dataclass(frozen=True, eq=False)
class CandidateSet:
    """Branches evaluated for one unreliable outer layer.

    ``candidates[j]`` is the full symbol vector of branch ``j`` and
    ``residuals[j]`` its squared distance ``||y - H x||^2``.
    """

    layer: int
    candidates: np.ndarray
    residuals: np.ndarray

    @property
    def best(self) -> int:
        return int(np.argmin(self.residuals))


@dataclass(frozen=True)
class OrderingState:
    """Undetected layer indices ``b`` and their current detection order ``t``."""

    b: tuple[int, ...]
    t: tuple[int, ...]

    def __post_init__(self):
        if sorted(self.b) != sorted(self.t) or len(set(self.b)) != len(self.b):
            raise ValueError("b and t must hold the same distinct indices")

    @classmethod
    def initial(cls, nt: int) -> "OrderingState":
        idx = tuple(range(nt))
        return cls(idx, idx)

    def without(self, k: int) -> "OrderingState":
        return OrderingState(tuple(i for i in self.b if i != k), tuple(i for i in self.t if i != k))


@dataclass(frozen=True, eq=False)
class DetectionResult:
    symbols: np.ndarray
    indices: np.ndarray
    stats: dict = field(default_factory=dict)
    candidate_sets: tuple[CandidateSet, ...] = ()
