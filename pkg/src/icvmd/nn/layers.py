"""Causal dilated convolutions, dense layers, and their exact backward passes.

All math is float64.  Forward functions return (output, cache); the matching
backward consumes (upstream_grad, cache) and returns input and parameter
gradients.  Batched tensors are [batch, channels, time].
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ParameterError


@dataclass
class ConvLayer:
    """1-D causal dilated convolution parameters.

    weights[o, i, j] multiplies input channel i at lag (width-1-j)*dilation;
    j = width-1 is the current sample, j = 0 the oldest.  Output at time t
    therefore never sees input later than t.
    """

    weights: np.ndarray  # [out_ch, in_ch, width]
    bias: np.ndarray  # [out_ch]
    dilation: int = 1

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        self.bias = np.asarray(self.bias, dtype=float)
        if self.weights.ndim != 3:
            raise ParameterError("conv weights must be [out_ch, in_ch, width]")
        if self.bias.shape != (self.weights.shape[0],):
            raise ParameterError("conv bias must match out_ch")
        if self.dilation < 1:
            raise ParameterError("dilation must be >= 1")

    @property
    def width(self) -> int:
        return self.weights.shape[2]


@dataclass
class Dense:
    weights: np.ndarray  # [out, in]
    bias: np.ndarray  # [out]

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        self.bias = np.asarray(self.bias, dtype=float)
        if self.weights.ndim != 2 or self.bias.shape != (self.weights.shape[0],):
            raise ParameterError("dense layer needs weights [out, in] and bias [out]")


def conv_forward(x: np.ndarray, layer: ConvLayer):
    """Batched causal dilated conv: x [B, C_in, T] -> y [B, C_out, T]."""
    if x.ndim != 3:
        raise ParameterError(f"conv input must be [B, C, T], got shape {x.shape}")
    if x.shape[1] != layer.weights.shape[1]:
        raise ParameterError(
            f"conv expects {layer.weights.shape[1]} input channels, got {x.shape[1]}"
        )
    b, _, t = x.shape
    width, d = layer.width, layer.dilation
    pad = (width - 1) * d
    xp = np.pad(x, ((0, 0), (0, 0), (pad, 0)))
    y = np.broadcast_to(layer.bias[None, :, None], (b, layer.bias.size, t)).copy()
    for j in range(width):
        y += np.einsum("oi,bit->bot", layer.weights[:, :, j], xp[:, :, j * d : j * d + t])
    return y, (xp, layer, t)


def conv_backward(dy: np.ndarray, cache):
    """Returns (dx, dweights, dbias)."""
    xp, layer, t = cache
    width, d = layer.width, layer.dilation
    pad = (width - 1) * d
    dw = np.empty_like(layer.weights)
    dxp = np.zeros_like(xp)
    for j in range(width):
        sl = xp[:, :, j * d : j * d + t]
        dw[:, :, j] = np.einsum("bot,bit->oi", dy, sl)
        dxp[:, :, j * d : j * d + t] += np.einsum("oi,bot->bit", layer.weights[:, :, j], dy)
    db = dy.sum(axis=(0, 2))
    return dxp[:, :, pad:], dw, db


def relu_forward(x: np.ndarray):
    y = np.maximum(x, 0.0)
    return y, (x > 0.0)


def relu_backward(dy: np.ndarray, cache):
    return dy * cache


def dense_forward(x: np.ndarray, layer: Dense):
    """x [N, in] -> [N, out]."""
    if x.ndim != 2 or x.shape[1] != layer.weights.shape[1]:
        raise ParameterError(
            f"dense expects [N, {layer.weights.shape[1]}], got shape {x.shape}"
        )
    return x @ layer.weights.T + layer.bias, x


def dense_backward(dy: np.ndarray, cache, layer: Dense):
    x = cache
    dw = dy.T @ x
    db = dy.sum(axis=0)
    dx = dy @ layer.weights
    return dx, dw, db


def causal_dilated_conv(x: np.ndarray, layer: ConvLayer) -> np.ndarray:
    """Single-sequence convenience wrapper: x [C, T] -> [C_out, T]."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 2:
        raise ParameterError(f"expected [channels, T], got shape {x.shape}")
    y, _ = conv_forward(x[None], layer)
    return y[0]


def receptive_field(width: int, dilations) -> int:
    """Number of past-inclusive input samples one output sample can see after a
    chain of causal convs with the given shared width and per-layer dilations:
    1 + (width-1) * sum(dilations)."""
    if width < 1:
        raise ParameterError("width must be >= 1")
    dil = list(dilations)
    if not dil or any(d < 1 for d in dil):
        raise ParameterError("dilations must be a non-empty list of ints >= 1")
    return 1 + (width - 1) * sum(dil)


def impulse_probe(width: int, dilations, t_len: int | None = None) -> int:
    """Measure the receptive field empirically.

    Builds a chain of single-channel causal convs with all-ones weights, feeds
    a unit impulse, and returns the length of the nonzero output span.  With
    exact arithmetic on an all-ones kernel the span equals receptive_field().
    """
    field_ = receptive_field(width, dilations)
    if t_len is None:
        t_len = 2 * field_ + 8
    pos = field_ + 4
    x = np.zeros((1, 1, t_len))
    x[0, 0, pos] = 1.0
    h = x
    for d in dilations:
        layer = ConvLayer(np.ones((1, 1, width)), np.zeros(1), dilation=d)
        h, _ = conv_forward(h, layer)
    nz = np.flatnonzero(h[0, 0] != 0.0)
    if nz.size == 0:
        return 0
    if nz[0] != pos:
        raise AssertionError("causal chain produced output before the impulse")
    return int(nz[-1] - nz[0] + 1)


def init_conv(rng: np.random.Generator, out_ch: int, in_ch: int, width: int, dilation: int) -> ConvLayer:
    """Uniform(+-sqrt(1/fan_in)) weights and biases.

    Biases are drawn (not zeroed) so no pre-activation sits exactly on the
    ReLU kink at init, which would poison finite-difference verification.
    """
    bound = np.sqrt(1.0 / (in_ch * width))
    w = rng.uniform(-bound, bound, (out_ch, in_ch, width))
    return ConvLayer(w, rng.uniform(-bound, bound, out_ch), dilation)


def init_dense(rng: np.random.Generator, out_dim: int, in_dim: int) -> Dense:
    bound = np.sqrt(1.0 / in_dim)
    return Dense(
        rng.uniform(-bound, bound, (out_dim, in_dim)), rng.uniform(-bound, bound, out_dim)
    )
