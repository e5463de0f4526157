"""Adam optimizer with bias-corrected moment estimates."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .tensor import Tensor


@dataclass
class AdamState:
    """Per-parameter optimizer state; moments start at zero."""

    first_moment: np.ndarray
    second_moment: np.ndarray
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    step_count: int = 0

    @classmethod
    def zeros_like(cls, value: np.ndarray, learning_rate: float = 1e-3, **kw) -> "AdamState":
        return cls(np.zeros_like(value), np.zeros_like(value), learning_rate, **kw)


def adam_step(params: np.ndarray, grads: np.ndarray, state: AdamState):
    """One bias-corrected Adam update; returns (new_params, new_state)."""
    if params.shape != grads.shape:
        raise ValueError(f"adam_step: shape mismatch {params.shape} vs {grads.shape}")
    t = state.step_count + 1
    m = state.beta1 * state.first_moment + (1.0 - state.beta1) * grads
    v = state.beta2 * state.second_moment + (1.0 - state.beta2) * grads * grads
    m_hat = m / (1.0 - state.beta1**t)
    v_hat = v / (1.0 - state.beta2**t)
    new_params = params - state.learning_rate * m_hat / (np.sqrt(v_hat) + state.epsilon)
    new_state = AdamState(
        m, v, state.learning_rate, state.beta1, state.beta2, state.epsilon, t
    )
    return new_params, new_state


@dataclass
class Adam:
    """Drives adam_step over a list of leaf tensors using their .grad slots."""

    params: Sequence[Tensor]
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    states: list[AdamState] = field(default_factory=list)

    def __post_init__(self):
        self.states = [
            AdamState.zeros_like(
                p.value, self.learning_rate, beta1=self.beta1, beta2=self.beta2,
                epsilon=self.epsilon,
            )
            for p in self.params
        ]

    def step(self) -> None:
        for i, p in enumerate(self.params):
            g = p.grad if p.grad is not None else np.zeros_like(p.value)
            p.value, self.states[i] = adam_step(p.value, g, self.states[i])

    def zero_grad(self) -> None:
        for p in self.params:
            p.grad = None
