"""Trainable DCT layer: truncated type-II DCT, per-coefficient scaling,
soft-thresholding, and inverse DCT back to the input length.

The forward and inverse transforms share the scale sqrt(2/N); the inverse
halves the DC term, which makes the pair exactly inverse when all N
coefficients are kept.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

FloatArray = npt.NDArray[np.float64]


def cosine_basis(n: int, m: int) -> FloatArray:
    """(m, n) matrix with entry [k, i] = cos(pi / (2n) * (2i + 1) * k)."""
    k = np.arange(m, dtype=np.float64)[:, None]
    i = np.arange(n, dtype=np.float64)[None, :]
    return np.cos(np.pi / (2.0 * n) * (2.0 * i + 1.0) * k)


@dataclass
class DctLayer:
    n: int = 32
    m: int = 8
    scales: FloatArray | None = None
    thresholds: FloatArray | None = None

    def __post_init__(self):
        if not 1 <= self.m <= self.n:
            raise ValueError(f"need 1 <= m <= n, got m={self.m}, n={self.n}")
        self.scales = (np.ones(self.m) if self.scales is None
                       else np.asarray(self.scales, dtype=np.float64).copy())
        self.thresholds = (np.zeros(self.m) if self.thresholds is None
                           else np.asarray(self.thresholds, dtype=np.float64).copy())
        if self.scales.shape != (self.m,) or self.thresholds.shape != (self.m,):
            raise ValueError(f"scales and thresholds must have length {self.m}")
        self.basis = cosine_basis(self.n, self.m)
        self._norm = np.sqrt(2.0 / self.n)
        self._dc_weight = np.ones(self.m)
        self._dc_weight[0] = 0.5

    def parameters(self) -> list[FloatArray]:
        """Live references to ``[scales, thresholds]``."""
        return [self.scales, self.thresholds]

    @property
    def effective_thresholds(self) -> FloatArray:
        return np.maximum(self.thresholds, 0.0)


@dataclass
class DctCache:
    x: FloatArray
    coeffs: FloatArray
    scaled: FloatArray
    shrunk: FloatArray


def _check_len(v: FloatArray, expected: int, what: str) -> FloatArray:
    v = np.asarray(v, dtype=np.float64)
    if v.shape[-1] != expected:
        raise ValueError(f"{what} must have length {expected}, got {v.shape[-1]}")
    return v


def dct_forward(layer: DctLayer, x: npt.ArrayLike) -> FloatArray:
    """First ``m`` type-II DCT coefficients of ``x``."""
    x = _check_len(x, layer.n, "DCT input")
    return layer._norm * (x @ layer.basis.T)


def scale_coeffs(layer: DctLayer, coeffs: npt.ArrayLike) -> FloatArray:
    return _check_len(coeffs, layer.m, "coefficient vector") * layer.scales


def soft_threshold(layer: DctLayer, coeffs: npt.ArrayLike) -> FloatArray:
    """``sign(c) * max(|c| - T, 0)`` with negative thresholds clamped to 0."""
    c = _check_len(coeffs, layer.m, "coefficient vector")
    return np.sign(c) * np.maximum(np.abs(c) - layer.effective_thresholds, 0.0)


def idct(layer: DctLayer, coeffs: npt.ArrayLike) -> FloatArray:
    """Length-``n`` reconstruction from ``m`` coefficients (DC term halved)."""
    c = _check_len(coeffs, layer.m, "coefficient vector")
    return layer._norm * ((c * layer._dc_weight) @ layer.basis)


def dct_layer_forward(layer: DctLayer, x: npt.ArrayLike) -> tuple[FloatArray, DctCache]:
    x = _check_len(x, layer.n, "DCT layer input")
    coeffs = dct_forward(layer, x)
    scaled = scale_coeffs(layer, coeffs)
    shrunk = soft_threshold(layer, scaled)
    return idct(layer, shrunk), DctCache(x, coeffs, scaled, shrunk)


def dct_layer_backward(layer: DctLayer, cache: DctCache, grad_out: npt.ArrayLike,
                       ) -> tuple[FloatArray, FloatArray, FloatArray]:
    """Returns ``(grad_input, grad_scales, grad_thresholds)``, summed over batch rows.

    Subgradients: shrinkage passes gradient only where ``|c| > T_eff``; the
    threshold gradient is ``-sign(c)`` there, and zero while ``T < 0`` (clamped).
    At exactly ``T = 0`` the clamp uses its right derivative so thresholds
    starting at zero can still grow.
    """
    if cache.coeffs.shape[-1] != layer.m or cache.x.shape[-1] != layer.n:
        raise ValueError("DCT cache does not belong to this layer")
    g = np.asarray(grad_out, dtype=np.float64)
    if g.shape != cache.x.shape:
        raise ValueError(f"grad_out shape {g.shape} != layer output shape {cache.x.shape}")

    g_shrunk = layer._norm * (g @ layer.basis.T) * layer._dc_weight
    active = np.abs(cache.scaled) > layer.effective_thresholds
    g_scaled = np.where(active, g_shrunk, 0.0)
    g_thr = np.where(active, -np.sign(cache.scaled) * g_shrunk, 0.0)
    g_thr = g_thr * (layer.thresholds >= 0.0)
    g_scales = g_scaled * cache.coeffs
    g_coeffs = g_scaled * layer.scales
    g_in = layer._norm * (g_coeffs @ layer.basis)
    if g.ndim > 1:
        g_scales, g_thr = g_scales.sum(axis=0), g_thr.sum(axis=0)
    return g_in, g_scales, g_thr
