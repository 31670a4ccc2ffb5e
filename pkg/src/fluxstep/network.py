"""Minimal dense network engine in float64 numpy.

Forward evaluation caches per-layer pre/post activations so that a single
backward sweep yields exact reverse-mode gradients with respect to every
weight, bias, and the input vector. A network is either a single layer stack
or one independent stack per physical component (multi-network topology);
in the latter case every stack consumes the full input and the outputs are
concatenated in component order.

All arithmetic is 64-bit: the finite-difference gradient checks in the test
suite run at 1e-5 relative tolerance, which single precision cannot meet.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, NumericalError, UsageError


class Activation(enum.Enum):
    RELU = "relu"
    LINEAR = "linear"


class Padding(enum.Enum):
    SAME_PAD_ZERO = "same-pad-zero"
    VALID = "valid"


@dataclass(frozen=True)
class DenseLayer:
    """One affine map plus activation: y = act(W x + b), W of shape (out, in)."""

    weights: np.ndarray
    bias: np.ndarray
    activation: Activation

    def __post_init__(self) -> None:
        W = np.array(self.weights, dtype=float)
        b = np.array(self.bias, dtype=float)
        if W.ndim != 2 or W.shape[0] < 1 or W.shape[1] < 1:
            raise ConfigurationError(f"weights must be a 2D matrix, got shape {W.shape}")
        if b.shape != (W.shape[0],):
            raise ConfigurationError(
                f"bias shape {b.shape} does not match output dim {W.shape[0]}"
            )
        if not (np.isfinite(W).all() and np.isfinite(b).all()):
            raise ConfigurationError("layer parameters must be finite")
        W.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "weights", W)
        object.__setattr__(self, "bias", b)

    @property
    def in_dim(self) -> int:
        return self.weights.shape[1]

    @property
    def out_dim(self) -> int:
        return self.weights.shape[0]


@dataclass(frozen=True)
class Network:
    """An ordered tuple of layer stacks; one stack = single-network topology.

    Every stack must chain dimensionally, end in a Linear layer (the output
    layer is never activated), and accept the same input width.
    """

    stacks: tuple[tuple[DenseLayer, ...], ...]

    def __post_init__(self) -> None:
        if not self.stacks or any(len(s) == 0 for s in self.stacks):
            raise ConfigurationError("network needs at least one non-empty stack")
        in_dims = {s[0].in_dim for s in self.stacks}
        if len(in_dims) != 1:
            raise ConfigurationError(f"stacks disagree on input width: {sorted(in_dims)}")
        for s_idx, stack in enumerate(self.stacks):
            for k in range(len(stack) - 1):
                if stack[k].out_dim != stack[k + 1].in_dim:
                    raise ConfigurationError(
                        f"stack {s_idx}: layer {k} outputs {stack[k].out_dim} "
                        f"but layer {k + 1} expects {stack[k + 1].in_dim}"
                    )
            if stack[-1].activation is not Activation.LINEAR:
                raise ConfigurationError(
                    f"stack {s_idx}: output layer must be Linear, "
                    f"got {stack[-1].activation.value}"
                )

    @classmethod
    def single(cls, layers: list[DenseLayer] | tuple[DenseLayer, ...]) -> "Network":
        return cls(stacks=(tuple(layers),))

    @classmethod
    def multi(cls, stacks) -> "Network":
        return cls(stacks=tuple(tuple(s) for s in stacks))

    @property
    def is_multi(self) -> bool:
        return len(self.stacks) > 1

    @property
    def in_dim(self) -> int:
        return self.stacks[0][0].in_dim

    @property
    def out_dim(self) -> int:
        return sum(s[-1].out_dim for s in self.stacks)

    @property
    def n_parameters(self) -> int:
        return sum(l.weights.size + l.bias.size for s in self.stacks for l in s)


@dataclass
class ForwardCache:
    """Per-layer intermediates of one forward pass, consumed by backward()."""

    net: Network
    x: np.ndarray
    pre: list[list[np.ndarray]] = field(default_factory=list)
    post: list[list[np.ndarray]] = field(default_factory=list)


@dataclass(frozen=True)
class LayerGrads:
    """Gradient of a scalar with respect to one layer's weights and bias."""

    d_weights: np.ndarray
    d_bias: np.ndarray


Gradients = tuple[tuple[LayerGrads, ...], ...]


def init_identity(
    in_dim: int,
    out_dim: int,
    activation: Activation = Activation.RELU,
    column_offset: int = 0,
) -> DenseLayer:
    """Identity-block initialization: W[i, i + column_offset] = 1, zero bias.

    With the default offset the ones sit on the main diagonal of the top-left
    square block and all other entries are zero; a positive offset shifts the
    block right, which lets a layer select a later slice of its input.
    """
    if in_dim < 1 or out_dim < 1:
        raise ConfigurationError("layer dimensions must be at least 1")
    if column_offset < 0 or column_offset >= in_dim:
        raise ConfigurationError(f"column_offset {column_offset} outside [0, {in_dim})")
    W = np.zeros((out_dim, in_dim))
    k = min(out_dim, in_dim - column_offset)
    W[np.arange(k), np.arange(k) + column_offset] = 1.0
    return DenseLayer(W, np.zeros(out_dim), activation)


def forward(net: Network, x: np.ndarray) -> tuple[np.ndarray, ForwardCache]:
    """Evaluate the network on one input vector.

    Returns the output vector (stack outputs concatenated in order) and the
    cache required for a matching backward() call.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (net.in_dim,):
        raise ConfigurationError(
            f"input shape {x.shape} does not match network input width {net.in_dim}"
        )
    if not np.isfinite(x).all():
        raise ConfigurationError("network input must be finite")
    cache = ForwardCache(net=net, x=x)
    outputs = []
    for s_idx, stack in enumerate(net.stacks):
        a = x
        pre: list[np.ndarray] = []
        post: list[np.ndarray] = []
        for k, layer in enumerate(stack):
            z = layer.weights @ a + layer.bias
            if not np.isfinite(z).all():
                raise NumericalError(
                    f"non-finite pre-activation in layer {k} of stack {s_idx}"
                )
            a = np.maximum(z, 0.0) if layer.activation is Activation.RELU else z
            pre.append(z)
            post.append(a)
        cache.pre.append(pre)
        cache.post.append(post)
        outputs.append(a)
    y = outputs[0] if len(outputs) == 1 else np.concatenate(outputs)
    return y, cache


def backward(
    net: Network, cache: ForwardCache, dL_dy: np.ndarray
) -> tuple[Gradients, np.ndarray]:
    """Exact reverse-mode gradients of a scalar with output-gradient dL_dy.

    Returns parameter gradients shaped like the network plus the gradient
    with respect to the input vector. The ReLU subgradient at 0 is taken as 0.
    """
    if cache.net is not net:
        raise UsageError("cache does not belong to this network; rerun forward()")
    dL_dy = np.asarray(dL_dy, dtype=float)
    if dL_dy.shape != (net.out_dim,):
        raise ConfigurationError(
            f"output gradient shape {dL_dy.shape} does not match width {net.out_dim}"
        )
    dL_dx = np.zeros_like(cache.x)
    stack_grads = []
    offset = 0
    for s_idx, stack in enumerate(net.stacks):
        width = stack[-1].out_dim
        g = dL_dy[offset : offset + width]
        offset += width
        grads: list[LayerGrads] = [None] * len(stack)  # type: ignore[list-item]
        for k in range(len(stack) - 1, -1, -1):
            layer = stack[k]
            if layer.activation is Activation.RELU:
                dz = g * (cache.pre[s_idx][k] > 0.0)
            else:
                dz = g
            a_prev = cache.x if k == 0 else cache.post[s_idx][k - 1]
            grads[k] = LayerGrads(np.outer(dz, a_prev), dz.copy())
            g = layer.weights.T @ dz
        dL_dx += g
        stack_grads.append(tuple(grads))
    return tuple(stack_grads), dL_dx


@dataclass(frozen=True)
class Conv1DKernel:
    """Stencil coefficients for a 1D convolution pass."""

    taps: np.ndarray
    padding: Padding = Padding.VALID

    def __post_init__(self) -> None:
        taps = np.atleast_1d(np.array(self.taps, dtype=float))
        if taps.ndim != 1 or taps.size < 1:
            raise ConfigurationError("kernel taps must be a non-empty 1D sequence")
        if self.padding is Padding.SAME_PAD_ZERO and taps.size % 2 == 0:
            raise ConfigurationError("zero-padded convolution requires an odd tap count")
        taps.setflags(write=False)
        object.__setattr__(self, "taps", taps)


def conv1d(values: np.ndarray, kernel: Conv1DKernel) -> np.ndarray:
    """Correlate a signal with a stencil: out[x] = sum_o in[x+o] * taps[o + k//2].

    Valid mode shrinks the output to n - k + 1 samples; zero-padded mode keeps
    the input length.
    """
    values = np.asarray(values, dtype=float)
    k = kernel.taps.size
    if kernel.padding is Padding.VALID and values.size < k:
        raise ConfigurationError(
            f"input length {values.size} shorter than kernel length {k}"
        )
    mode = "valid" if kernel.padding is Padding.VALID else "same"
    return np.correlate(values, kernel.taps, mode=mode)
