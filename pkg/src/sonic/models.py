"""Backbones, classification branches, the logit-fusion network, and the
training loop.

Two small backbone families stand in for large pretrained image models:
a plain stack of 3x3 convolutions ( VGG-flavoured ) and a stack with
additive skip connections ( ResNet-flavoured ). Each branch is a backbone
followed by GAP -> Dense(128) -> ReLU -> Dropout -> Dense(C); the branch
output is raw logits with no activation. The fusion network concatenates
the two branches' logits and maps them through Dense(12) -> ReLU ->
Dense(C) -> Softmax. All weights train jointly; nothing is frozen.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .nn import (
    AdamConfig,
    Conv2D,
    Dense,
    Dropout,
    GlobalAveragePool,
    Layer,
    Parameter,
    ReLU,
    Sequential,
    Softmax,
    adam_step,
    cross_entropy,
    cross_entropy_grad,
    one_hot,
)

__all__ = [
    "BackboneKind",
    "ResidualBlock",
    "Branch",
    "SonicNetwork",
    "SingleNetwork",
    "TrainConfig",
    "HIDDEN_WIDTH",
    "FUSION_WIDTH",
    "train_network",
    "build_backbone",
]

HIDDEN_WIDTH = 128  # per-branch hidden layer
FUSION_WIDTH = 12   # hidden layer over the concatenated logits
DEFAULT_DROPOUT = 0.2


class BackboneKind(enum.Enum):
    PLAIN = "plain"
    RESIDUAL = "residual"


class ResidualBlock(Layer):
    """Two 3x3 convolutions with an additive skip connection.

    The skip path is a 1x1 projection whenever the block changes channel
    count or spatial stride, otherwise the identity. ReLU is applied after
    the first convolution and after the join.
    """

    def __init__(self, in_channels: int, out_channels: int, stride: int,
                 rng: np.random.Generator, dtype=np.float64):
        self.conv1 = Conv2D(in_channels, out_channels, 3, stride=stride, padding=1,
                            rng=rng, dtype=dtype)
        self.relu1 = ReLU()
        self.conv2 = Conv2D(out_channels, out_channels, 3, stride=1, padding=1,
                            rng=rng, dtype=dtype)
        self.project = None
        if stride != 1 or in_channels != out_channels:
            self.project = Conv2D(in_channels, out_channels, 1, stride=stride,
                                  padding=0, rng=rng, dtype=dtype)
        self.relu_out = ReLU()

    def parameters(self):
        params = self.conv1.parameters() + self.conv2.parameters()
        if self.project is not None:
            params += self.project.parameters()
        return params

    def forward(self, x, train=False, rng=None):
        main = self.conv2.forward(
            self.relu1.forward(self.conv1.forward(x, train, rng), train, rng), train, rng
        )
        skip = self.project.forward(x, train, rng) if self.project is not None else x
        return self.relu_out.forward(main + skip, train, rng)

    def backward(self, grad):
        joined = self.relu_out.backward(grad)
        d_main = self.conv1.backward(self.relu1.backward(self.conv2.backward(joined)))
        d_skip = self.project.backward(joined) if self.project is not None else joined
        return d_main + d_skip


def build_backbone(kind: BackboneKind, rng: np.random.Generator,
                   dtype=np.float64) -> tuple[Sequential, int]:
    """Construct a backbone; returns (network, output channel count)."""
    if kind is BackboneKind.PLAIN:
        net = Sequential([
            Conv2D(3, 8, 3, stride=4, padding=0, rng=rng, dtype=dtype,
                   input_grad=False), ReLU(),
            Conv2D(8, 16, 3, stride=2, padding=1, rng=rng, dtype=dtype), ReLU(),
            Conv2D(16, 24, 3, stride=2, padding=1, rng=rng, dtype=dtype), ReLU(),
            Conv2D(24, 24, 3, stride=1, padding=1, rng=rng, dtype=dtype), ReLU(),
        ])
        return net, 24
    if kind is BackboneKind.RESIDUAL:
        net = Sequential([
            Conv2D(3, 8, 3, stride=4, padding=0, rng=rng, dtype=dtype,
                   input_grad=False), ReLU(),
            ResidualBlock(8, 16, stride=2, rng=rng, dtype=dtype),
            ResidualBlock(16, 24, stride=2, rng=rng, dtype=dtype),
        ])
        return net, 24
    raise ValueError(f"unknown backbone kind: {kind!r}")


class Branch(Layer):
    """Backbone plus classification head emitting raw class logits."""

    def __init__(self, kind: BackboneKind, n_classes: int,
                 rng: np.random.Generator, dtype=np.float64,
                 dropout: float = DEFAULT_DROPOUT):
        self.kind = kind
        self.backbone, feat_channels = build_backbone(kind, rng, dtype)
        self.pool = GlobalAveragePool()
        self.hidden = Dense(feat_channels, HIDDEN_WIDTH, rng=rng, dtype=dtype)
        self.act = ReLU()
        self.drop = Dropout(dropout)
        self.logits = Dense(HIDDEN_WIDTH, n_classes, rng=rng, dtype=dtype)

    def parameters(self):
        return (self.backbone.parameters() + self.hidden.parameters()
                + self.logits.parameters())

    def forward(self, x, train=False, rng=None):
        return self.forward_with_hidden(x, train, rng)[0]

    def forward_with_hidden(self, x, train=False, rng=None):
        """Returns (logits, post-ReLU hidden activations)."""
        features = self.pool.forward(self.backbone.forward(x, train, rng), train, rng)
        hidden = self.act.forward(self.hidden.forward(features, train, rng), train, rng)
        z = self.logits.forward(self.drop.forward(hidden, train, rng), train, rng)
        return z, hidden

    def backward(self, grad):
        d_hidden = self.act.backward(self.drop.backward(self.logits.backward(grad)))
        return self.backbone.backward(self.pool.backward(self.hidden.backward(d_hidden)))


@dataclass
class SonicOutput:
    probabilities: np.ndarray   # (batch, C)
    logits_a: np.ndarray        # (batch, C)
    logits_b: np.ndarray        # (batch, C)
    penultimate: np.ndarray     # (batch, FUSION_WIDTH), post-ReLU


@dataclass
class SingleOutput:
    probabilities: np.ndarray   # (batch, C)
    penultimate: np.ndarray     # (batch, HIDDEN_WIDTH), post-ReLU


class SonicNetwork:
    """Two branches fused by concatenating their logits.

    The concatenation order is fixed: branch A's logits occupy columns
    0..C, branch B's columns C..2C.
    """

    def __init__(self, n_classes: int,
                 backbones: tuple[BackboneKind, BackboneKind] = (
                     BackboneKind.PLAIN, BackboneKind.RESIDUAL),
                 seed: int = 0, dtype=np.float64,
                 dropout: float = DEFAULT_DROPOUT):
        if n_classes < 2:
            raise ValueError(f"n_classes must be >= 2, got {n_classes}")
        if len(backbones) != 2:
            raise ValueError("the fusion network takes exactly two backbones")
        rng = np.random.default_rng(seed)
        self.n_classes = n_classes
        self.backbones = tuple(backbones)
        self.seed = seed
        self.dtype = np.dtype(dtype)
        self.dropout = dropout
        self.branch_a = Branch(backbones[0], n_classes, rng, dtype, dropout)
        self.branch_b = Branch(backbones[1], n_classes, rng, dtype, dropout)
        self.fusion_hidden = Dense(2 * n_classes, FUSION_WIDTH, rng=rng, dtype=dtype)
        self.fusion_act = ReLU()
        self.fusion_out = Dense(FUSION_WIDTH, n_classes, rng=rng, dtype=dtype)
        self.softmax = Softmax()

    def parameters(self):
        return (self.branch_a.parameters() + self.branch_b.parameters()
                + self.fusion_hidden.parameters() + self.fusion_out.parameters())

    def named_parameters(self):
        names = []
        for prefix, branch in (("branch_a", self.branch_a), ("branch_b", self.branch_b)):
            names += _named_branch_parameters(prefix, branch)
        for prefix, layer in (("fusion_hidden", self.fusion_hidden),
                              ("fusion_out", self.fusion_out)):
            names += [(f"{prefix}.weight", layer.weight), (f"{prefix}.bias", layer.bias)]
        return names

    def zero_grad(self):
        for p in self.parameters():
            p.zero_grad()

    def forward(self, x, train=False, rng=None) -> SonicOutput:
        if x.ndim != 4 or x.shape[0] < 1:
            raise ValueError(f"expected a non-empty (batch, h, w, 3) input, got {x.shape}")
        z_a = self.branch_a.forward(x, train, rng)
        z_b = self.branch_b.forward(x, train, rng)
        fused = np.concatenate([z_a, z_b], axis=1)
        penultimate = self.fusion_act.forward(
            self.fusion_hidden.forward(fused, train, rng), train, rng
        )
        probs = self.softmax.forward(
            self.fusion_out.forward(penultimate, train, rng), train, rng
        )
        return SonicOutput(probs, z_a, z_b, penultimate)

    def backward(self, grad_probabilities):
        d_fused = self.fusion_hidden.backward(
            self.fusion_act.backward(
                self.fusion_out.backward(self.softmax.backward(grad_probabilities))
            )
        )
        c = self.n_classes
        self.branch_a.backward(np.ascontiguousarray(d_fused[:, :c]))
        self.branch_b.backward(np.ascontiguousarray(d_fused[:, c:]))


class SingleNetwork:
    """One branch fine-tuned end to end; its logits feed softmax directly."""

    def __init__(self, n_classes: int, backbone: BackboneKind = BackboneKind.PLAIN,
                 seed: int = 0, dtype=np.float64, dropout: float = DEFAULT_DROPOUT):
        if n_classes < 2:
            raise ValueError(f"n_classes must be >= 2, got {n_classes}")
        rng = np.random.default_rng(seed)
        self.n_classes = n_classes
        self.backbone_kind = backbone
        self.seed = seed
        self.dtype = np.dtype(dtype)
        self.dropout = dropout
        self.branch = Branch(backbone, n_classes, rng, dtype, dropout)
        self.softmax = Softmax()

    def parameters(self):
        return self.branch.parameters()

    def named_parameters(self):
        return _named_branch_parameters("branch", self.branch)

    def zero_grad(self):
        for p in self.parameters():
            p.zero_grad()

    def forward(self, x, train=False, rng=None) -> SingleOutput:
        if x.ndim != 4 or x.shape[0] < 1:
            raise ValueError(f"expected a non-empty (batch, h, w, 3) input, got {x.shape}")
        z, hidden = self.branch.forward_with_hidden(x, train, rng)
        return SingleOutput(self.softmax.forward(z, train, rng), hidden)

    def backward(self, grad_probabilities):
        self.branch.backward(self.softmax.backward(grad_probabilities))


def _named_branch_parameters(prefix: str, branch: Branch):
    named = []
    conv_layers = []
    for layer in branch.backbone.layers:
        if isinstance(layer, Conv2D):
            conv_layers.append(layer)
        elif isinstance(layer, ResidualBlock):
            conv_layers.append(layer.conv1)
            conv_layers.append(layer.conv2)
            if layer.project is not None:
                conv_layers.append(layer.project)
    for i, conv in enumerate(conv_layers):
        named.append((f"{prefix}.conv{i}.weight", conv.weight))
        named.append((f"{prefix}.conv{i}.bias", conv.bias))
    named.append((f"{prefix}.hidden.weight", branch.hidden.weight))
    named.append((f"{prefix}.hidden.bias", branch.hidden.bias))
    named.append((f"{prefix}.logits.weight", branch.logits.weight))
    named.append((f"{prefix}.logits.bias", branch.logits.bias))
    return named


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 20
    batch_size: int = 32
    adam: AdamConfig = field(default_factory=AdamConfig)
    seed: int = 0

    def __post_init__(self) -> None:
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")


def train_network(net, images: np.ndarray, labels: np.ndarray,
                  cfg: TrainConfig = TrainConfig()) -> list[float]:
    """Train ``net`` in place; returns the per-epoch mean loss trace.

    Each epoch shuffles with the seeded generator and walks batches of
    ``cfg.batch_size`` (the final partial batch is trained, not dropped).
    Every parameter - both branches and the fusion head - receives an Adam
    update on every batch.
    """
    images = np.asarray(images)
    labels = np.asarray(labels)
    if images.ndim != 4 or images.shape[0] == 0:
        raise ValueError("training set must be a non-empty (n, h, w, 3) array")
    if labels.shape != (images.shape[0],):
        raise ValueError("labels must be 1-D and match the image count")
    targets = one_hot(labels, net.n_classes)

    rng = np.random.default_rng(cfg.seed)
    params = net.parameters()
    n = images.shape[0]
    trace = []
    for _ in range(cfg.epochs):
        order = rng.permutation(n)
        total = 0.0
        for lo in range(0, n, cfg.batch_size):
            batch_idx = order[lo : lo + cfg.batch_size]
            xb = images[batch_idx].astype(net.dtype, copy=False)
            yb = targets[batch_idx]
            net.zero_grad()
            out = net.forward(xb, train=True, rng=rng)
            loss = cross_entropy(out.probabilities, yb)
            net.backward(cross_entropy_grad(out.probabilities, yb).astype(net.dtype))
            for p in params:
                adam_step(p, cfg.adam)
            total += loss * batch_idx.size
        trace.append(total / n)
    return trace
