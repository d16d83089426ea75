"""scikit-learn style wrappers.

``MIMODetector.fit`` takes the channel matrix (the known CSI) and
``predict`` maps a batch of received vectors, one per row, to detected
symbol vectors. ``QAMModulator`` maps bit rows to symbol rows and back.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_received_batch, check_system
from .detectors import KINDS, DetectorConfig, detect_indices
from .detectors.base import normalize_kind
from .signal_model import NoiseModel, build_qam

__all__ = ["MIMODetector", "QAMModulator"]


class QAMModulator(TransformerMixin, BaseEstimator):
    """Gray-coded square QAM mapper.

    Parameters
    ----------
    m : int
        Constellation size (4 or 16, any power of 4 works).
    """

    def __init__(self, m=4):
        self.m = m

    def fit(self, X=None, y=None):
        self.constellation_ = build_qam(self.m)
        return self

    def transform(self, X):
        """Bit rows of shape ``(n, nt * log2 m)`` to symbol rows ``(n, nt)``."""
        check_is_fitted(self, "constellation_")
        c = self.constellation_
        X = np.atleast_2d(np.asarray(X))
        if X.ndim != 2 or X.shape[1] % c.bits_per_symbol:
            raise ValueError(f"bit rows must have a multiple of {c.bits_per_symbol} columns")
        idx = c.bits_to_indices(X.reshape(-1))
        return c.points[idx].reshape(X.shape[0], -1)

    def inverse_transform(self, S):
        check_is_fitted(self, "constellation_")
        c = self.constellation_
        S = np.atleast_2d(np.asarray(S, dtype=np.complex128))
        bits = c.indices_to_bits(c.indices_of(S.reshape(-1)))
        return bits.reshape(S.shape[0], -1)


class MIMODetector(BaseEstimator):
    """Symbol-vector detector for a fixed, perfectly known channel.

    Parameters
    ----------
    method : str
        One of ``ml``, ``zf``, ``mmse``, ``sic``, ``mf-sic``, ``imf-sic``,
        ``oimf-sic``.
    m : int
        QAM order.
    noise_var : float
        Per-entry complex noise variance used by the MMSE filters.
    d_th : float
        Reliability radius for the multiple-feedback detectors.
    n_candidates : int
        Points fed back on an unreliable layer.
    max_depth : int
        Nesting budget of the recursive search.
    fixed_r : bool
        Order by LLR using the full-channel covariance.
    """

    def __init__(self, method="imf-sic", m=4, noise_var=1.0, d_th=0.2, n_candidates=4,
                 max_depth=2, fixed_r=False):
        self.method = method
        self.m = m
        self.noise_var = noise_var
        self.d_th = d_th
        self.n_candidates = n_candidates
        self.max_depth = max_depth
        self.fixed_r = fixed_r

    def fit(self, H, y=None):
        kind = normalize_kind(self.method)
        _, H = check_system(np.zeros(np.shape(H)[0]), H)
        self.constellation_ = build_qam(self.m)
        self.config_ = DetectorConfig(
            kind, d_th=self.d_th, s=self.n_candidates, l=self.max_depth, fixed_r=self.fixed_r
        ).validate(self.constellation_)
        self.noise_ = NoiseModel(float(self.noise_var))
        self.channel_ = H
        self.n_features_in_ = H.shape[0]
        self.n_streams_ = H.shape[1]
        return self

    def predict_indices(self, Y) -> np.ndarray:
        check_is_fitted(self, "channel_")
        Y = check_received_batch(Y, self.n_features_in_)
        out = np.empty((Y.shape[0], self.n_streams_), dtype=np.int64)
        for i, y in enumerate(Y):
            out[i], _ = detect_indices(
                self.config_, np.ascontiguousarray(y), self.channel_, self.constellation_,
                self.noise_.sigma2,
            )
        return out

    def predict(self, Y) -> np.ndarray:
        """Detected symbol vectors, shape ``(n_samples, nt)``."""
        idx = self.predict_indices(Y)
        return self.constellation_.points[idx]

    def predict_bits(self, Y) -> np.ndarray:
        idx = self.predict_indices(Y)
        return self.constellation_.bit_table[idx].reshape(idx.shape[0], -1)

    def score(self, Y, S) -> float:
        """Fraction of transmitted symbols recovered exactly."""
        S = np.atleast_2d(np.asarray(S, dtype=np.complex128))
        return float(np.mean(np.isclose(self.predict(Y), S)))


MIMODetector.methods = KINDS
