"""Spectrogram-to-image preparation: resize, normalize, replicate channels.

The classifier consumes 224x224x3 tensors with values in [0, 1]; the three
channels are identical copies of one normalized plane.
"""

from __future__ import annotations

import enum

import numpy as np

from .dsp import Spectrogram

__all__ = [
    "IMAGE_SIZE",
    "NormalizeMode",
    "resize_bilinear",
    "normalize",
    "replicate_channels",
    "prepare_image",
]

IMAGE_SIZE = 224


class NormalizeMode(enum.Enum):
    # log-minmax compresses the heavy-tailed magnitude distribution before
    # the affine rescale; minmax is the plain affine map.
    LOG_MINMAX = "log-minmax"
    MINMAX = "minmax"


def _axis_coords(out_size: int, in_size: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Corner-aligned source coordinates split into floor index and fraction."""
    if in_size == 1:
        zeros = np.zeros(out_size)
        return zeros.astype(np.intp), zeros.astype(np.intp), zeros
    pos = np.arange(out_size) * ((in_size - 1) / (out_size - 1)) if out_size > 1 else np.zeros(1)
    lo = np.minimum(pos.astype(np.intp), in_size - 2)
    return lo, lo + 1, pos - lo


def resize_bilinear(matrix: np.ndarray, out_h: int = IMAGE_SIZE, out_w: int = IMAGE_SIZE) -> np.ndarray:
    """Resample a 2-D matrix to ``out_h`` x ``out_w`` with corner-aligned
    bilinear interpolation.

    A single-row or single-column input broadcasts along the degenerate
    axis. Output values are clamped to the input range, so interpolation
    can never escape [min(input), max(input)].
    """
    m = np.asarray(matrix, dtype=np.float64)
    if m.ndim != 2 or m.size == 0:
        raise ValueError(f"expected a non-empty 2-D matrix, got shape {m.shape}")
    if out_h < 1 or out_w < 1:
        raise ValueError("output dimensions must be >= 1")

    r0, r1, fr = _axis_coords(out_h, m.shape[0])
    c0, c1, fc = _axis_coords(out_w, m.shape[1])
    fr = fr[:, None]
    fc = fc[None, :]

    top = m[np.ix_(r0, c0)] * (1.0 - fc) + m[np.ix_(r0, c1)] * fc
    bottom = m[np.ix_(r1, c0)] * (1.0 - fc) + m[np.ix_(r1, c1)] * fc
    out = top * (1.0 - fr) + bottom * fr
    return np.clip(out, m.min(), m.max())


def normalize(matrix: np.ndarray, mode: NormalizeMode = NormalizeMode.LOG_MINMAX) -> np.ndarray:
    """Map a nonnegative matrix into [0, 1].

    LOG_MINMAX applies ``ln(1 + v)`` before the min-max rescale; MINMAX is
    affine only. A constant input maps to all zeros.
    """
    m = np.asarray(matrix, dtype=np.float64)
    if np.any(m < 0):
        raise ValueError("normalize expects nonnegative values")
    if mode is NormalizeMode.LOG_MINMAX:
        m = np.log1p(m)
    lo = m.min()
    hi = m.max()
    if hi == lo:
        return np.zeros_like(m)
    return (m - lo) / (hi - lo)


def replicate_channels(matrix: np.ndarray) -> np.ndarray:
    """Stack three identical copies of a 2-D plane into an HxWx3 tensor."""
    m = np.asarray(matrix)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {m.shape}")
    return np.repeat(m[:, :, None], 3, axis=2)


def prepare_image(
    spectrogram: Spectrogram | np.ndarray,
    mode: NormalizeMode = NormalizeMode.LOG_MINMAX,
    size: int = IMAGE_SIZE,
) -> np.ndarray:
    """Full prep pipeline: resize -> normalize -> replicate to 3 channels."""
    values = spectrogram.values if isinstance(spectrogram, Spectrogram) else spectrogram
    return replicate_channels(normalize(resize_bilinear(values, size, size), mode))
