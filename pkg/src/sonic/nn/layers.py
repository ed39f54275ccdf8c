"""Minimal layer library with reverse-mode gradients.

Layers follow a forward/backward protocol: ``forward(x, train=..., rng=...)``
returns the output and, in train mode, stores whatever the backward pass
needs on the layer; ``backward(grad)`` accumulates parameter gradients and
returns the gradient with respect to the layer input. Calling ``backward``
without a preceding train-mode ``forward`` is a state error. Eval-mode
forward never mutates the layer, so inference over frozen parameters is
safe from any number of threads.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "Parameter",
    "Layer",
    "Dense",
    "Conv2D",
    "ReLU",
    "GlobalAveragePool",
    "Dropout",
    "Softmax",
    "Sequential",
    "glorot_uniform",
]


class Parameter:
    """A trainable tensor with its gradient and Adam moment buffers."""

    __slots__ = ("value", "grad", "adam_m", "adam_v", "step_count")

    def __init__(self, value: np.ndarray):
        self.value = np.asarray(value)
        self.grad = np.zeros_like(self.value)
        self.adam_m = np.zeros_like(self.value)
        self.adam_v = np.zeros_like(self.value)
        self.step_count = 0

    @property
    def shape(self) -> tuple[int, ...]:
        return self.value.shape

    def zero_grad(self) -> None:
        self.grad.fill(0.0)


def glorot_uniform(shape: tuple[int, ...], fan_in: int, fan_out: int,
                   rng: np.random.Generator, dtype=np.float64) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape).astype(dtype)


class Layer:
    def parameters(self) -> list[Parameter]:
        return []

    def forward(self, x: np.ndarray, train: bool = False,
                rng: np.random.Generator | None = None) -> np.ndarray:
        raise NotImplementedError

    def backward(self, grad: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def zero_grad(self) -> None:
        for p in self.parameters():
            p.zero_grad()

    def _take_cache(self):
        cache = getattr(self, "_cache", None)
        if cache is None:
            raise RuntimeError(
                f"{type(self).__name__}.backward called without a train-mode forward"
            )
        self._cache = None
        return cache


class Dense(Layer):
    """Affine map ``x @ weight + bias`` on (batch, in_features) inputs."""

    def __init__(self, in_features: int, out_features: int,
                 rng: np.random.Generator, dtype=np.float64):
        self.in_features = in_features
        self.out_features = out_features
        self.weight = Parameter(
            glorot_uniform((in_features, out_features), in_features, out_features, rng, dtype)
        )
        self.bias = Parameter(np.zeros(out_features, dtype=dtype))
        self._cache = None

    def parameters(self):
        return [self.weight, self.bias]

    def forward(self, x, train=False, rng=None):
        if x.ndim != 2 or x.shape[1] != self.in_features:
            raise ValueError(
                f"Dense expects (batch, {self.in_features}), got {x.shape}"
            )
        if train:
            self._cache = x
        return x @ self.weight.value + self.bias.value

    def backward(self, grad):
        x = self._take_cache()
        self.weight.grad += x.T @ grad
        self.bias.grad += grad.sum(axis=0)
        return grad @ self.weight.value.T


class Conv2D(Layer):
    """Valid cross-correlation with square kernel, stride and zero padding.

    Input layout is (batch, height, width, channels); the kernel tensor is
    (k, k, in_channels, out_channels). Internally the padded input is
    unfolded once into a contiguous column matrix so both directions run
    as single BLAS matmuls.
    """

    def __init__(self, in_channels: int, out_channels: int, kernel: int,
                 stride: int = 1, padding: int = 0,
                 rng: np.random.Generator | None = None, dtype=np.float64,
                 input_grad: bool = True):
        if kernel < 1 or stride < 1 or padding < 0:
            raise ValueError("kernel and stride must be >= 1, padding >= 0")
        if padding > kernel - 1:
            raise ValueError("padding must be < kernel")
        self.in_channels = in_channels
        self.out_channels = out_channels
        self.kernel = kernel
        self.stride = stride
        self.padding = padding
        # The first layer of a network never needs a gradient for its
        # input; skipping it removes the most expensive fold.
        self.input_grad = input_grad
        fan_in = kernel * kernel * in_channels
        fan_out = kernel * kernel * out_channels
        self.weight = Parameter(
            glorot_uniform((kernel, kernel, in_channels, out_channels),
                           fan_in, fan_out, rng, dtype)
        )
        self.bias = Parameter(np.zeros(out_channels, dtype=dtype))
        self._cache = None

    def parameters(self):
        return [self.weight, self.bias]

    def _out_size(self, size: int) -> int:
        return (size + 2 * self.padding - self.kernel) // self.stride + 1

    def _pad(self, x):
        p = self.padding
        if not p:
            return x
        b, h, w, c = x.shape
        xp = np.zeros((b, h + 2 * p, w + 2 * p, c), dtype=x.dtype)
        xp[:, p : p + h, p : p + w, :] = x
        return xp

    def _unfold(self, xp, out_h, out_w, stride):
        """Columns of shape (batch*out_h*out_w, k*k*channels), each row the
        receptive patch of one output pixel in (k, k, channel) order."""
        k = self.kernel
        channels = xp.shape[3]
        windows = np.lib.stride_tricks.sliding_window_view(xp, (k, k), axis=(1, 2))
        windows = windows[:, : (out_h - 1) * stride + 1 : stride,
                          : (out_w - 1) * stride + 1 : stride]
        col = np.ascontiguousarray(windows.transpose(0, 1, 2, 4, 5, 3))
        return col.reshape(-1, k * k * channels)

    def forward(self, x, train=False, rng=None):
        if x.ndim != 4 or x.shape[3] != self.in_channels:
            raise ValueError(
                f"Conv2D expects (batch, h, w, {self.in_channels}), got {x.shape}"
            )
        out_h = self._out_size(x.shape[1])
        out_w = self._out_size(x.shape[2])
        if out_h < 1 or out_w < 1:
            raise ValueError(
                f"Conv2D input {x.shape[1]}x{x.shape[2]} too small for kernel "
                f"{self.kernel}, stride {self.stride}, padding {self.padding}"
            )
        col = self._unfold(self._pad(x), out_h, out_w, self.stride)
        k2c = self.kernel * self.kernel * self.in_channels
        out = col @ self.weight.value.reshape(k2c, self.out_channels)
        out += self.bias.value
        if train:
            self._cache = (col, x.shape, (out_h, out_w))
        return out.reshape(x.shape[0], out_h, out_w, self.out_channels)

    def backward(self, grad):
        col, x_shape, (out_h, out_w) = self._take_cache()
        b, h, w, _ = x_shape
        p, k, s = self.padding, self.kernel, self.stride
        k2c = k * k * self.in_channels

        g2d = grad.reshape(-1, self.out_channels)
        self.weight.grad += (col.T @ g2d).reshape(self.weight.value.shape)
        self.bias.grad += g2d.sum(axis=0)
        if not self.input_grad:
            return None

        if s == 1:
            # For unit stride the input gradient is itself a valid
            # cross-correlation: full-correlate the output gradient with
            # the spatially flipped, channel-transposed kernel.
            gp = np.zeros((b, h + k - 1, w + k - 1, self.out_channels), dtype=grad.dtype)
            gp[:, k - 1 - p : k - 1 - p + out_h, k - 1 - p : k - 1 - p + out_w, :] = grad
            colg = self._unfold(gp, h, w, 1)
            w_rot = self.weight.value[::-1, ::-1].transpose(0, 1, 3, 2)
            dx = colg @ np.ascontiguousarray(w_rot).reshape(-1, self.in_channels)
            return dx.reshape(b, h, w, self.in_channels)

        dcol = g2d @ self.weight.value.reshape(k2c, self.out_channels).T
        # Fold columns back: one strided accumulate per kernel offset.
        dcol = dcol.reshape(b, out_h, out_w, k, k, self.in_channels)
        dxp = np.zeros((b, h + 2 * p, w + 2 * p, self.in_channels), dtype=grad.dtype)
        for u in range(k):
            rows = slice(u, u + (out_h - 1) * s + 1, s)
            for v in range(k):
                dxp[:, rows, v : v + (out_w - 1) * s + 1 : s, :] += dcol[:, :, :, u, v, :]
        if p:
            return dxp[:, p : p + h, p : p + w, :]
        return dxp


class ReLU(Layer):
    def __init__(self):
        self._cache = None

    def forward(self, x, train=False, rng=None):
        if train:
            self._cache = x > 0
        return np.maximum(x, 0)

    def backward(self, grad):
        return grad * self._take_cache()


class GlobalAveragePool(Layer):
    """Per-channel spatial mean: (batch, h, w, c) -> (batch, c)."""

    def __init__(self):
        self._cache = None

    def forward(self, x, train=False, rng=None):
        if x.ndim != 4:
            raise ValueError(f"GlobalAveragePool expects (batch, h, w, c), got {x.shape}")
        if train:
            self._cache = x.shape
        return x.mean(axis=(1, 2))

    def backward(self, grad):
        b, h, w, c = self._take_cache()
        scaled = grad / (h * w)
        return np.broadcast_to(scaled[:, None, None, :], (b, h, w, c)).copy()


class Dropout(Layer):
    """Inverted dropout: train mode zeroes units with probability ``rate``
    and scales survivors by 1/(1-rate); eval mode is the exact identity."""

    def __init__(self, rate: float):
        if not 0.0 <= rate < 1.0:
            raise ValueError(f"dropout rate must be in [0, 1), got {rate}")
        self.rate = rate
        self._cache = None

    def forward(self, x, train=False, rng=None):
        if not train or self.rate == 0.0:
            return x
        if rng is None:
            raise ValueError("train-mode Dropout needs an rng")
        scale = 1.0 / (1.0 - self.rate)
        mask = (rng.random(x.shape) >= self.rate).astype(x.dtype) * scale
        self._cache = mask
        return x * mask

    def backward(self, grad):
        if self.rate == 0.0:
            return grad
        return grad * self._take_cache()


class Softmax(Layer):
    """Row softmax with max-shift for numerical stability."""

    def __init__(self):
        self._cache = None

    def forward(self, x, train=False, rng=None):
        shifted = x - x.max(axis=-1, keepdims=True)
        e = np.exp(shifted)
        y = e / e.sum(axis=-1, keepdims=True)
        if train:
            self._cache = y
        return y

    def backward(self, grad):
        y = self._take_cache()
        inner = (grad * y).sum(axis=-1, keepdims=True)
        return y * (grad - inner)


class Sequential(Layer):
    def __init__(self, layers: list[Layer]):
        self.layers = list(layers)

    def parameters(self):
        return [p for layer in self.layers for p in layer.parameters()]

    def forward(self, x, train=False, rng=None):
        for layer in self.layers:
            x = layer.forward(x, train=train, rng=rng)
        return x

    def backward(self, grad):
        for layer in reversed(self.layers):
            grad = layer.backward(grad)
        return grad
