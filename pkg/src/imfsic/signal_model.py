"""Physical-layer substrate: QAM alphabets, bit mapping, channel and noise draws."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .numerics import as_complex_matrix, as_complex_vector

__all__ = [
    "Constellation",
    "SystemDims",
    "NoiseModel",
    "RngStream",
    "TxFrame",
    "build_qam",
    "quantize",
    "neighbor_order",
    "snr_to_sigma2",
    "sigma2_to_snr",
    "generate_channel",
    "generate_noise",
    "random_frame",
    "frame_from_bits",
    "transmit",
    "count_bit_errors",
]


def _gray(n: int) -> int:
    return n ^ (n >> 1)


@dataclass(frozen=True, eq=False)
class Constellation:
    """Square QAM alphabet with Gray labels.

    Points are ordered real-part major, imaginary-part minor, both
    ascending, so 4-QAM is ``[-1-1j, -1+1j, 1-1j, 1+1j]``.

    Attributes
    ----------
    points : ndarray of complex128, shape (M,)
    labels : ndarray of int64, shape (M,)
        Integer bit label of each point, MSB first when expanded.
    bits_per_symbol : int
    es : float
        Average symbol energy under a uniform prior.
    """

    points: np.ndarray
    labels: np.ndarray
    bits_per_symbol: int
    es: float
    bit_table: np.ndarray = field(init=False, repr=False)
    _label_to_index: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        m = len(self.points)
        if m < 4 or 4 ** round(math.log(m, 4)) != m:
            raise ValueError(f"constellation size must be a power of 4, got {m}")
        if sorted(self.labels.tolist()) != list(range(m)):
            raise ValueError("labels must be a permutation of 0..M-1")
        k = self.bits_per_symbol
        shifts = np.arange(k - 1, -1, -1)
        table = ((self.labels[:, None] >> shifts) & 1).astype(np.uint8)
        inverse = np.empty(m, dtype=np.int64)
        inverse[self.labels] = np.arange(m)
        for arr in (self.points, self.labels, table, inverse):
            arr.setflags(write=False)
        object.__setattr__(self, "bit_table", table)
        object.__setattr__(self, "_label_to_index", inverse)

    @property
    def size(self) -> int:
        return len(self.points)

    def __repr__(self) -> str:
        return f"Constellation(M={self.size}, es={self.es:g})"

    def indices_of(self, symbols) -> np.ndarray:
        """Alphabet index of each symbol; raises if a symbol is not a point."""
        symbols = np.atleast_1d(np.asarray(symbols, dtype=np.complex128))
        dist = np.abs(symbols[:, None] - self.points[None, :])
        idx = np.argmin(dist, axis=1)
        if np.any(dist[np.arange(len(symbols)), idx] > 1e-9):
            raise ValueError("symbol not in the constellation alphabet")
        return idx

    def bits_to_indices(self, bits) -> np.ndarray:
        bits = np.asarray(bits, dtype=np.int64).reshape(-1, self.bits_per_symbol)
        if np.any((bits != 0) & (bits != 1)):
            raise ValueError("bits must be 0 or 1")
        weights = 1 << np.arange(self.bits_per_symbol - 1, -1, -1)
        return self._label_to_index[bits @ weights]

    def indices_to_bits(self, indices) -> np.ndarray:
        return self.bit_table[np.asarray(indices, dtype=np.int64)].reshape(-1)


def build_qam(m: int) -> Constellation:
    """Unnormalised square ``m``-QAM on the odd-integer grid, Gray coded per axis.

    ``m = 4`` gives ``Es = 2`` and ``m = 16`` gives ``Es = 10``.
    """
    if not isinstance(m, (int, np.integer)) or m < 4 or 4 ** round(math.log(m, 4)) != m:
        raise ValueError(f"unsupported QAM order {m!r}; expected a power of 4 such as 4 or 16")
    side = math.isqrt(m)
    half_bits = int(math.log2(side))
    levels = np.arange(-(side - 1), side, 2, dtype=float)
    points = np.empty(m, dtype=np.complex128)
    labels = np.empty(m, dtype=np.int64)
    for i in range(side):
        for q in range(side):
            points[i * side + q] = complex(levels[i], levels[q])
            labels[i * side + q] = (_gray(i) << half_bits) | _gray(q)
    es = float(np.mean(points.real**2 + points.imag**2))
    return Constellation(points=points, labels=labels, bits_per_symbol=2 * half_bits, es=es)


def quantize(z: complex, c: Constellation) -> complex:
    """Nearest alphabet point; ties go to the lowest point index."""
    if not np.isfinite(z):
        raise ValueError("soft value must be finite")
    d = np.abs(z - c.points) ** 2
    return complex(c.points[int(np.argmin(d))])


def neighbor_order(z: complex, c: Constellation, s: int) -> list[complex]:
    """The ``s`` alphabet points closest to ``z``, nearest first."""
    if not 1 <= s <= c.size:
        raise ValueError(f"s must lie in [1, {c.size}], got {s}")
    d = np.abs(z - c.points) ** 2
    order = np.argsort(d, kind="stable")[:s]
    return [complex(p) for p in c.points[order]]


@dataclass(frozen=True)
class SystemDims:
    nt: int
    nr: int

    def __post_init__(self):
        if not (isinstance(self.nt, (int, np.integer)) and isinstance(self.nr, (int, np.integer))):
            raise TypeError("antenna counts must be integers")
        if not self.nr >= self.nt >= 1:
            raise ValueError(f"need nr >= nt >= 1, got nt={self.nt}, nr={self.nr}")


@dataclass(frozen=True)
class NoiseModel:
    sigma2: float

    def __post_init__(self):
        if not self.sigma2 > 0 or not math.isfinite(self.sigma2):
            raise ValueError(f"sigma2 must be positive and finite, got {self.sigma2}")


def snr_to_sigma2(snr_db: float, dims: SystemDims, c: Constellation) -> NoiseModel:
    """Per-entry noise variance for ``SNR = 10 log10(Nt Es / sigma2)``."""
    return NoiseModel(dims.nt * c.es / 10.0 ** (snr_db / 10.0))


def sigma2_to_snr(nm: NoiseModel, dims: SystemDims, c: Constellation) -> float:
    return 10.0 * math.log10(dims.nt * c.es / nm.sigma2)


@dataclass(frozen=True)
class RngStream:
    """Reproducible random stream identified by ``(seed, stream_id)``.

    ``stream_id`` may be an int or a tuple of ints; each distinct id yields
    an independent Philox stream, so trials can run in any order or process.
    """

    seed: int
    stream_id: int | tuple[int, ...] = 0

    def _key(self) -> tuple[int, ...]:
        sid = self.stream_id
        return tuple(sid) if isinstance(sid, tuple) else (int(sid),)

    def child(self, k: int) -> "RngStream":
        return RngStream(self.seed, self._key() + (int(k),))

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=int(self.seed), spawn_key=self._key())
        return np.random.Generator(np.random.Philox(ss))


def _complex_normal(gen: np.random.Generator, shape) -> np.ndarray:
    # CN(0, 1): variance 1/2 per real dimension
    g = gen.standard_normal(shape + (2,))
    return (g[..., 0] + 1j * g[..., 1]) * math.sqrt(0.5)


def generate_channel(dims: SystemDims, rng: RngStream) -> np.ndarray:
    """i.i.d. CN(0, 1) Rayleigh flat-fading matrix of shape ``(nr, nt)``."""
    return _complex_normal(rng.generator(), (dims.nr, dims.nt))


def generate_noise(dims: SystemDims, nm: NoiseModel, rng: RngStream) -> np.ndarray:
    return _complex_normal(rng.generator(), (dims.nr,)) * math.sqrt(nm.sigma2)


@dataclass(frozen=True, eq=False)
class TxFrame:
    """Transmitted bits and the symbol vector they map to."""

    bits: np.ndarray
    symbols: np.ndarray
    indices: np.ndarray


def frame_from_bits(bits, c: Constellation) -> TxFrame:
    bits = np.asarray(bits, dtype=np.uint8).reshape(-1)
    if bits.size % c.bits_per_symbol:
        raise ValueError("bit count is not a multiple of bits_per_symbol")
    idx = c.bits_to_indices(bits)
    return TxFrame(bits=bits, symbols=c.points[idx], indices=idx)


def random_frame(dims: SystemDims, c: Constellation, rng: RngStream) -> TxFrame:
    bits = rng.generator().integers(0, 2, size=dims.nt * c.bits_per_symbol, dtype=np.uint8)
    return frame_from_bits(bits, c)


def transmit(h, frame: TxFrame | Sequence[complex], n) -> np.ndarray:
    """Received vector ``y = H s + n``."""
    h = as_complex_matrix(h, "h")
    s = frame.symbols if isinstance(frame, TxFrame) else frame
    s = as_complex_vector(s, "symbols")
    n = as_complex_vector(n, "noise")
    if h.shape[1] != s.shape[0] or h.shape[0] != n.shape[0]:
        raise ValueError(f"dimension mismatch: H {h.shape}, s {s.shape}, n {n.shape}")
    return h @ s + n


def count_bit_errors(truth: TxFrame, detected, c: Constellation) -> int:
    """Hamming distance between the sent bits and the labels of ``detected``."""
    detected = np.asarray(detected, dtype=np.complex128).reshape(-1)
    if detected.shape[0] != truth.symbols.shape[0]:
        raise ValueError("detected vector length differs from the transmitted frame")
    bits = c.indices_to_bits(c.indices_of(detected))
    return int(np.count_nonzero(bits != truth.bits))
