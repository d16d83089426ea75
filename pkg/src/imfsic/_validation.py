"""Input checks shared by the detector functions and the estimators."""

from __future__ import annotations

import numpy as np

from .numerics import as_complex_matrix, as_complex_vector
from .signal_model import Constellation, NoiseModel


def check_system(y, h):
    """Return ``(y, H)`` as contiguous complex arrays with matching shapes."""
    h = np.ascontiguousarray(as_complex_matrix(h, "channel matrix"))
    y = np.ascontiguousarray(as_complex_vector(y, "received vector"))
    nr, nt = h.shape
    if y.shape[0] != nr:
        raise ValueError(f"received vector has length {y.shape[0]}, channel has {nr} rows")
    if nt < 1 or nr < nt:
        raise ValueError(f"need nr >= nt >= 1, channel is {nr}x{nt}")
    if nt > 62:
        raise ValueError("at most 62 transmit layers are supported")
    return y, h


def check_received_batch(Y, nr: int) -> np.ndarray:
    Y = np.asarray(Y, dtype=np.complex128)
    if Y.ndim == 1:
        Y = Y[None, :]
    if Y.ndim != 2 or Y.shape[1] != nr:
        raise ValueError(f"expected received vectors of shape (n_samples, {nr}), got {Y.shape}")
    if not np.all(np.isfinite(Y)):
        raise ValueError("received vectors contain non-finite entries")
    return Y


def check_noise(nm) -> NoiseModel:
    if isinstance(nm, NoiseModel):
        return nm
    return NoiseModel(float(nm))


def check_constellation(c) -> Constellation:
    if not isinstance(c, Constellation):
        raise TypeError(f"expected a Constellation, got {type(c).__name__}")
    return c
