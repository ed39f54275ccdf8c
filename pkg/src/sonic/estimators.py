"""Scikit-learn style estimators wrapping the pipeline stages.

``SpectrogramImageTransformer`` turns raw fixed-length signal segments
into 224x224x3 image tensors; ``SonicClassifier`` and
``BackboneClassifier`` train the fusion and single-backbone networks. All
follow the usual conventions: constructor arguments are stored verbatim,
fitted state lives in trailing-underscore attributes, and ``get_params`` /
``set_params`` come from :class:`sklearn.base.BaseEstimator` so the
estimators clone and compose with pipelines and search utilities.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.exceptions import NotFittedError

from .dsp import RealSignal, StftConfig, WindowKind, compute_spectrogram
from .image import IMAGE_SIZE, NormalizeMode, prepare_image
from .models import (
    BackboneKind,
    SingleNetwork,
    SonicNetwork,
    TrainConfig,
    train_network,
)
from .nn import AdamConfig

__all__ = [
    "SpectrogramImageTransformer",
    "SonicClassifier",
    "BackboneClassifier",
]

_PREDICT_BATCH = 64


class SpectrogramImageTransformer(TransformerMixin, BaseEstimator):
    """Stateless transformer: (n, segment_len) signals -> (n, 224, 224, 3).

    Parameters
    ----------
    sample_rate_hz : sampling rate of the incoming segments.
    window_len, hop, nfft : STFT analysis parameters (nfft a power of two).
    window : window name, one of "rectangular", "hann", "hamming".
    normalize : "log-minmax" (default) or "minmax".
    dtype : dtype of the emitted image tensors.
    """

    def __init__(self, sample_rate_hz=700.0, window_len=256, hop=64, nfft=256,
                 window="hann", normalize="log-minmax", dtype="float32"):
        self.sample_rate_hz = sample_rate_hz
        self.window_len = window_len
        self.hop = hop
        self.nfft = nfft
        self.window = window
        self.normalize = normalize
        self.dtype = dtype

    def fit(self, X, y=None):
        self._stft_config()  # validate parameters early
        return self

    def transform(self, X):
        cfg = self._stft_config()
        mode = NormalizeMode(self.normalize)
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X[None, :]
        if X.ndim != 2:
            raise ValueError(f"expected (n_segments, segment_len), got shape {X.shape}")
        out = np.empty((X.shape[0], IMAGE_SIZE, IMAGE_SIZE, 3), dtype=self.dtype)
        for i, row in enumerate(X):
            spec = compute_spectrogram(RealSignal(row, self.sample_rate_hz), cfg)
            out[i] = prepare_image(spec, mode)
        return out

    def _stft_config(self) -> StftConfig:
        return StftConfig(
            window_len=self.window_len,
            hop=self.hop,
            nfft=self.nfft,
            window=WindowKind(self.window),
        )


class _NetworkClassifier(ClassifierMixin, BaseEstimator):
    """Shared fit/predict machinery for the network-backed classifiers."""

    def _build_network(self, n_classes):
        raise NotImplementedError

    def fit(self, X, y):
        X = np.asarray(X)
        y = np.asarray(y)
        if X.ndim != 4 or X.shape[0] == 0:
            raise ValueError(f"X must be a non-empty (n, h, w, 3) array, got {X.shape}")
        if y.shape != (X.shape[0],):
            raise ValueError("y must be 1-D with one label per image")
        self.classes_ = np.unique(y)
        if self.classes_.size < 2:
            raise ValueError("need at least two classes to fit")
        y_idx = np.searchsorted(self.classes_, y)

        self.network_ = self._build_network(self.classes_.size)
        cfg = TrainConfig(
            epochs=self.epochs,
            batch_size=self.batch_size,
            adam=AdamConfig(learning_rate=self.learning_rate),
            seed=self.random_state,
        )
        self.loss_trace_ = train_network(self.network_, X, y_idx, cfg)
        return self

    def _forward_batched(self, X):
        if not hasattr(self, "network_"):
            raise NotFittedError(f"{type(self).__name__} is not fitted yet")
        X = np.asarray(X)
        if X.ndim != 4:
            raise ValueError(f"X must be (n, h, w, 3), got shape {X.shape}")
        for lo in range(0, X.shape[0], _PREDICT_BATCH):
            xb = X[lo : lo + _PREDICT_BATCH].astype(self.network_.dtype, copy=False)
            yield self.network_.forward(xb, train=False)

    def predict_proba(self, X):
        return np.concatenate([out.probabilities for out in self._forward_batched(X)])

    def predict(self, X):
        # np.argmax takes the first maximum, i.e. ties break low.
        return self.classes_[np.argmax(self.predict_proba(X), axis=1)]

    def penultimate(self, X):
        """Activations of the layer feeding the output layer, one row per
        sample (12 wide for the fusion model, 128 for a single branch)."""
        return np.concatenate([out.penultimate for out in self._forward_batched(X)])


class SonicClassifier(_NetworkClassifier):
    """Two-backbone logit-fusion classifier.

    Both branches produce per-class logits; the fused vector (branch A's
    logits then branch B's) feeds a small dense network that emits class
    probabilities. Branches and fusion head train jointly with Adam.

    Parameters
    ----------
    backbones : pair of backbone names from {"plain", "residual"}.
    epochs, batch_size, learning_rate : training-loop settings.
    dropout : dropout rate used in both branch heads.
    random_state : seed for init, shuffling, and dropout.
    dtype : numeric precision of the network ("float32" or "float64").
    """

    def __init__(self, backbones=("plain", "residual"), epochs=20, batch_size=32,
                 learning_rate=1e-3, dropout=0.2, random_state=0, dtype="float32"):
        self.backbones = backbones
        self.epochs = epochs
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.dropout = dropout
        self.random_state = random_state
        self.dtype = dtype

    def _build_network(self, n_classes):
        kinds = tuple(BackboneKind(name) for name in self.backbones)
        return SonicNetwork(
            n_classes,
            backbones=kinds,
            seed=self.random_state,
            dtype=np.dtype(self.dtype),
            dropout=self.dropout,
        )

    def branch_logits(self, X):
        """Pre-fusion logits from both branches: a pair of (n, C) arrays."""
        outs = list(self._forward_batched(X))
        return (
            np.concatenate([o.logits_a for o in outs]),
            np.concatenate([o.logits_b for o in outs]),
        )


class BackboneClassifier(_NetworkClassifier):
    """Single-backbone baseline: one branch whose logits feed softmax
    directly. Same training loop and head shape as one fusion branch."""

    def __init__(self, backbone="plain", epochs=20, batch_size=32,
                 learning_rate=1e-3, dropout=0.2, random_state=0, dtype="float32"):
        self.backbone = backbone
        self.epochs = epochs
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.dropout = dropout
        self.random_state = random_state
        self.dtype = dtype

    def _build_network(self, n_classes):
        return SingleNetwork(
            n_classes,
            backbone=BackboneKind(self.backbone),
            seed=self.random_state,
            dtype=np.dtype(self.dtype),
            dropout=self.dropout,
        )
