"""First-order parameter updates: plain gradient descent and adaptive moments.

Updates are functional: apply_gradients returns a new network and a new
optimizer state, leaving its inputs untouched, so identical inputs always
produce bit-identical results.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigurationError, TrainingError
from .network import DenseLayer, Gradients, Network


class OptimizerKind(enum.Enum):
    GRADIENT_DESCENT = "gradient-descent"
    ADAPTIVE_MOMENTS = "adaptive-moments"


@dataclass(frozen=True)
class OptimizerState:
    """Hyperparameters plus (for the adaptive method) moment accumulators.

    Accumulators mirror the gradient structure: one (mW, mb) pair per layer
    per stack. They are created lazily on the first apply call.
    """

    kind: OptimizerKind
    learning_rate: float
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon_hat: float = 1e-8
    step_count: int = 0
    moments1: tuple | None = None
    moments2: tuple | None = None

    def __post_init__(self) -> None:
        if self.learning_rate <= 0:
            raise ConfigurationError(f"learning rate must be positive, got {self.learning_rate}")
        if not (0.0 < self.beta1 < 1.0 and 0.0 < self.beta2 < 1.0):
            raise ConfigurationError("beta1 and beta2 must lie in (0, 1)")
        if self.epsilon_hat <= 0:
            raise ConfigurationError("epsilon_hat must be positive")


def gradient_descent(learning_rate: float) -> OptimizerState:
    return OptimizerState(OptimizerKind.GRADIENT_DESCENT, learning_rate)


def adaptive_moments(
    learning_rate: float = 1e-3,
    beta1: float = 0.9,
    beta2: float = 0.999,
    epsilon_hat: float = 1e-8,
) -> OptimizerState:
    return OptimizerState(
        OptimizerKind.ADAPTIVE_MOMENTS, learning_rate, beta1, beta2, epsilon_hat
    )


def _zeros_like_grads(grads: Gradients) -> tuple:
    return tuple(
        tuple((np.zeros_like(g.d_weights), np.zeros_like(g.d_bias)) for g in stack)
        for stack in grads
    )


def _check_finite(grads: Gradients) -> None:
    for s_idx, stack in enumerate(grads):
        for k, g in enumerate(stack):
            if not (np.isfinite(g.d_weights).all() and np.isfinite(g.d_bias).all()):
                raise TrainingError(
                    f"non-finite gradient in layer {k} of stack {s_idx}"
                )


def apply_gradients(
    params: Network, grads: Gradients, state: OptimizerState
) -> tuple[Network, OptimizerState]:
    """One update of every weight and bias from the supplied gradients.

    Gradient descent: theta <- theta - lr * g. Adaptive moments: standard
    bias-corrected first/second moment scaling with epsilon outside the root,
    theta <- theta - lr * m_hat / (sqrt(v_hat) + eps).
    """
    _check_finite(grads)
    if state.kind is OptimizerKind.GRADIENT_DESCENT:
        new_stacks = tuple(
            tuple(
                DenseLayer(
                    layer.weights - state.learning_rate * g.d_weights,
                    layer.bias - state.learning_rate * g.d_bias,
                    layer.activation,
                )
                for layer, g in zip(stack, gstack)
            )
            for stack, gstack in zip(params.stacks, grads)
        )
        return Network(new_stacks), replace(state, step_count=state.step_count + 1)

    m = state.moments1 if state.moments1 is not None else _zeros_like_grads(grads)
    v = state.moments2 if state.moments2 is not None else _zeros_like_grads(grads)
    t = state.step_count + 1
    b1, b2 = state.beta1, state.beta2
    c1 = 1.0 - b1**t
    c2 = 1.0 - b2**t
    lr, eps = state.learning_rate, state.epsilon_hat

    new_stacks = []
    new_m = []
    new_v = []
    for stack, gstack, mstack, vstack in zip(params.stacks, grads, m, v):
        layers = []
        m_pairs = []
        v_pairs = []
        for layer, g, (mW, mb), (vW, vb) in zip(stack, gstack, mstack, vstack):
            mW = b1 * mW + (1.0 - b1) * g.d_weights
            mb = b1 * mb + (1.0 - b1) * g.d_bias
            vW = b2 * vW + (1.0 - b2) * g.d_weights**2
            vb = b2 * vb + (1.0 - b2) * g.d_bias**2
            W = layer.weights - lr * (mW / c1) / (np.sqrt(vW / c2) + eps)
            b = layer.bias - lr * (mb / c1) / (np.sqrt(vb / c2) + eps)
            layers.append(DenseLayer(W, b, layer.activation))
            m_pairs.append((mW, mb))
            v_pairs.append((vW, vb))
        new_stacks.append(tuple(layers))
        new_m.append(tuple(m_pairs))
        new_v.append(tuple(v_pairs))
    new_state = replace(
        state, step_count=t, moments1=tuple(new_m), moments2=tuple(new_v)
    )
    return Network(tuple(new_stacks)), new_state
