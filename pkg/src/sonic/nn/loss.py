"""Cross-entropy on probability rows (post-softmax)."""

from __future__ import annotations

import numpy as np

__all__ = ["PROB_FLOOR", "one_hot", "cross_entropy", "cross_entropy_grad"]

# Probabilities are clamped here before the log so a confidently wrong
# prediction cannot produce an infinite loss.
PROB_FLOOR = 1e-12

_ROW_SUM_TOL = 1e-6


def one_hot(labels: np.ndarray, n_classes: int) -> np.ndarray:
    labels = np.asarray(labels)
    if labels.ndim != 1:
        raise ValueError(f"labels must be 1-D, got shape {labels.shape}")
    if labels.size and (labels.min() < 0 or labels.max() >= n_classes):
        raise ValueError(f"labels must lie in 0..{n_classes - 1}")
    encoded = np.zeros((labels.size, n_classes))
    encoded[np.arange(labels.size), labels] = 1.0
    return encoded


def _check(probabilities: np.ndarray, targets: np.ndarray) -> None:
    if probabilities.shape != targets.shape or probabilities.ndim != 2:
        raise ValueError(
            f"expected matching (batch, classes) arrays, got "
            f"{probabilities.shape} and {targets.shape}"
        )
    row_sums = probabilities.sum(axis=1)
    if np.any(np.abs(row_sums - 1.0) > _ROW_SUM_TOL):
        raise ValueError("probability rows must each sum to 1")


def cross_entropy(probabilities: np.ndarray, targets: np.ndarray) -> float:
    """Batch-mean of ``-sum_c target_c * log(prob_c)`` over the rows."""
    _check(probabilities, targets)
    clamped = np.maximum(probabilities, PROB_FLOOR)
    return float(-(targets * np.log(clamped)).sum() / probabilities.shape[0])


def cross_entropy_grad(probabilities: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """Gradient of :func:`cross_entropy` with respect to the probabilities."""
    _check(probabilities, targets)
    clamped = np.maximum(probabilities, PROB_FLOOR)
    grad = -(targets / clamped) / probabilities.shape[0]
    # Below the clamp the loss is constant in the probability.
    grad[probabilities < PROB_FLOOR] = 0.0
    return grad
