from .layers import (
    Conv2D,
    Dense,
    Dropout,
    GlobalAveragePool,
    Layer,
    Parameter,
    ReLU,
    Sequential,
    Softmax,
    glorot_uniform,
)
from .loss import PROB_FLOOR, cross_entropy, cross_entropy_grad, one_hot
from .optim import AdamConfig, adam_step

__all__ = [
    "Conv2D",
    "Dense",
    "Dropout",
    "GlobalAveragePool",
    "Layer",
    "Parameter",
    "ReLU",
    "Sequential",
    "Softmax",
    "glorot_uniform",
    "PROB_FLOOR",
    "cross_entropy",
    "cross_entropy_grad",
    "one_hot",
    "AdamConfig",
    "adam_step",
]
