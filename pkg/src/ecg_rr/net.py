"""Small dense-network engine: linear layers, ReLU, sigmoid and the 32-16-8-4-8-16-32 autoencoder.

Vectors are 1-D arrays; batches are 2-D arrays with one sample per row.
Backward passes return gradients summed over the batch rows, so the caller
folds any batch averaging into ``grad_out``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import numpy.typing as npt

from .errors import NumericFailure

FloatArray = npt.NDArray[np.float64]

AE_DIMS = (32, 16, 8, 4, 8, 16, 32)


@dataclass
class LinearLayer:
    """``y = W x + b`` with ``W`` of shape (out_dim, in_dim)."""

    weight: FloatArray
    bias: FloatArray

    def __post_init__(self):
        self.weight = np.asarray(self.weight, dtype=np.float64)
        self.bias = np.asarray(self.bias, dtype=np.float64)
        if self.weight.ndim != 2 or self.bias.shape != (self.weight.shape[0],):
            raise ValueError(
                f"bias shape {self.bias.shape} does not match weight shape {self.weight.shape}")

    @property
    def in_dim(self) -> int:
        return self.weight.shape[1]

    @property
    def out_dim(self) -> int:
        return self.weight.shape[0]

    @classmethod
    def init(cls, in_dim: int, out_dim: int, rng: np.random.Generator) -> LinearLayer:
        bound = 1.0 / np.sqrt(in_dim)
        return cls(rng.uniform(-bound, bound, size=(out_dim, in_dim)), np.zeros(out_dim))


def linear_forward(layer: LinearLayer, x: npt.ArrayLike) -> FloatArray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != layer.in_dim:
        raise ValueError(f"expected input of length {layer.in_dim}, got {x.shape[-1]}")
    return x @ layer.weight.T + layer.bias


def relu(x: npt.ArrayLike) -> FloatArray:
    return np.maximum(np.asarray(x, dtype=np.float64), 0.0)


def relu_grad(pre: FloatArray) -> FloatArray:
    # subgradient at 0 is 0
    return (pre > 0.0).astype(np.float64)


def sigmoid(x: npt.ArrayLike) -> FloatArray:
    """Logistic function, evaluated without overflow for large ``|x|``."""
    x = np.asarray(x, dtype=np.float64)
    e = np.exp(-np.abs(x))
    return np.where(x >= 0.0, 1.0 / (1.0 + e), e / (1.0 + e))


@dataclass
class Autoencoder:
    layers: list[LinearLayer]

    def __post_init__(self):
        dims = [(l.in_dim, l.out_dim) for l in self.layers]
        expected = list(zip(AE_DIMS[:-1], AE_DIMS[1:]))
        if dims != expected:
            raise ValueError(f"autoencoder layer dims {dims} != {expected}")

    @classmethod
    def init(cls, rng: np.random.Generator | int) -> Autoencoder:
        rng = np.random.default_rng(rng)
        return cls([LinearLayer.init(i, o, rng) for i, o in zip(AE_DIMS[:-1], AE_DIMS[1:])])

    @classmethod
    def zeros(cls) -> Autoencoder:
        return cls([LinearLayer(np.zeros((o, i)), np.zeros(o))
                    for i, o in zip(AE_DIMS[:-1], AE_DIMS[1:])])

    def parameters(self) -> list[FloatArray]:
        """Parameter arrays in the order W1, b1, ..., W6, b6 (live references)."""
        return [p for l in self.layers for p in (l.weight, l.bias)]


@dataclass
class ForwardCache:
    """Inputs and pre-activations of every layer, kept for the backward pass."""

    inputs: list[FloatArray] = field(default_factory=list)
    pre: list[FloatArray] = field(default_factory=list)
    output: FloatArray | None = None


def ae_forward(model: Autoencoder, x: npt.ArrayLike) -> tuple[FloatArray, ForwardCache]:
    """ReLU after layers 1-5, sigmoid after layer 6; output lies in (0, 1)."""
    h = np.asarray(getattr(x, "mag", x), dtype=np.float64)
    cache = ForwardCache()
    last = len(model.layers) - 1
    # overflow surfaces as NumericFailure below rather than as a warning
    with np.errstate(over="ignore", invalid="ignore"):
        for i, layer in enumerate(model.layers):
            cache.inputs.append(h)
            z = linear_forward(layer, h)
            cache.pre.append(z)
            h = sigmoid(z) if i == last else relu(z)
    if not np.all(np.isfinite(h)):
        raise NumericFailure("non-finite autoencoder output")
    cache.output = h
    return h, cache


def ae_backward(model: Autoencoder, cache: ForwardCache, grad_out: npt.ArrayLike,
                ) -> tuple[list[FloatArray], FloatArray]:
    """Backpropagate ``dL/d(output)``.

    Returns ``(grads, grad_input)`` where ``grads`` follows ``model.parameters()``
    order and ``grad_input`` is ``dL/dx``.
    """
    if len(cache.pre) != len(model.layers) or cache.output is None:
        raise ValueError("forward cache does not belong to this model")
    g = np.asarray(grad_out, dtype=np.float64)
    if g.shape != cache.output.shape:
        raise ValueError(f"grad_out shape {g.shape} != output shape {cache.output.shape}")
    for layer, z, a in zip(model.layers, cache.pre, cache.inputs):
        if z.shape[-1] != layer.out_dim or a.shape[-1] != layer.in_dim:
            raise ValueError("forward cache does not belong to this model")

    y = cache.output
    g = g * y * (1.0 - y)
    grads: list[FloatArray] = [np.empty(0)] * (2 * len(model.layers))
    for i in range(len(model.layers) - 1, -1, -1):
        layer, a = model.layers[i], cache.inputs[i]
        if i < len(model.layers) - 1:
            g = g * relu_grad(cache.pre[i])
        if g.ndim == 1:
            grads[2 * i] = np.outer(g, a)
            grads[2 * i + 1] = g.copy()
        else:
            grads[2 * i] = g.T @ a
            grads[2 * i + 1] = g.sum(axis=0)
        g = g @ layer.weight
    return grads, g
