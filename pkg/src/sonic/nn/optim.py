"""Adam with bias correction."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .layers import Parameter

__all__ = ["AdamConfig", "adam_step"]


@dataclass(frozen=True)
class AdamConfig:
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    def __post_init__(self) -> None:
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be > 0")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise ValueError("beta1 and beta2 must lie in [0, 1)")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be > 0")


def adam_step(param: Parameter, cfg: AdamConfig = AdamConfig()) -> None:
    """One Adam update of ``param.value`` from ``param.grad``, in place.

    m <- b1*m + (1-b1)*g;  v <- b2*v + (1-b2)*g^2;
    theta <- theta - lr * m_hat / (sqrt(v_hat) + eps)
    with m_hat, v_hat the bias-corrected moments.
    """
    param.step_count += 1
    t = param.step_count
    g = param.grad
    param.adam_m *= cfg.beta1
    param.adam_m += (1.0 - cfg.beta1) * g
    param.adam_v *= cfg.beta2
    param.adam_v += (1.0 - cfg.beta2) * np.square(g)
    m_hat = param.adam_m / (1.0 - cfg.beta1**t)
    v_hat = param.adam_v / (1.0 - cfg.beta2**t)
    param.value -= cfg.learning_rate * m_hat / (np.sqrt(v_hat) + cfg.epsilon)
