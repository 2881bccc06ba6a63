"""Inference-time backpropagating refinement of an alpha matte.

A refinement module maps an initial matte through

    alpha_hat = exp(up(A)) * alpha_init + up(B)

where ``A`` and ``B`` are G x G parameter grids bilinearly upsampled to the
image size. Starting from zero grids (the identity map), plain gradient
descent minimises ``C1 + c2_weight * C2``:

* ``C1`` is the mean squared deviation of ``alpha_hat`` from 0 on the band
  of the definite background and from 1 on the band of the definite
  foreground;
* ``C2`` is the squared mean absolute change over the unknown region.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .core import (
    BG,
    FG,
    UNKNOWN,
    ConfigError,
    DiagnosticWarning,
    as_plane,
    as_trimap,
    check_same_hw,
    trimap_bands,
)
from .resize import resize, resize_adjoint


@dataclass(frozen=True)
class BrConfig:
    iters: int = 100
    lr: float = 20.0
    c2_weight: float = 0.1
    grid_size: int = 64

    def __post_init__(self):
        if self.iters < 1:
            raise ConfigError(f"iters must be >= 1, got {self.iters}")
        if not self.lr > 0:
            raise ConfigError(f"lr must be positive, got {self.lr}")
        if self.grid_size < 1:
            raise ConfigError(f"grid_size must be >= 1, got {self.grid_size}")


class HistoryEntry(NamedTuple):
    iteration: int
    c1: float
    c2: float
    total: float


def zero_grid(size: int) -> np.ndarray:
    return np.zeros((size, size))


def interp_upsample(grid, height: int, width: int) -> np.ndarray:
    """Bilinear upsampling of a parameter grid to ``height x width``."""
    return resize(as_plane(grid, "grid"), height, width)


def br_forward(alpha_init, a, b) -> np.ndarray:
    """``exp(up(a)) * alpha_init + up(b)``, unclamped."""
    alpha_init = as_plane(alpha_init, "alpha_init")
    a = as_plane(a, "a")
    b = as_plane(b, "b")
    if a.shape != b.shape:
        raise ConfigError(f"grids differ in shape: {a.shape} vs {b.shape}")
    h, w = alpha_init.shape
    return np.exp(interp_upsample(a, h, w)) * alpha_init + interp_upsample(b, h, w)


def _bands(trimap):
    band_fg, band_bg = trimap_bands(trimap)
    return band_fg, band_bg, int(band_fg.sum() + band_bg.sum())


def loss_c1(alpha_hat, trimap) -> float:
    """Mean squared violation of "alpha is 0/1 next to the definite regions"."""
    alpha_hat = as_plane(alpha_hat, "alpha_hat")
    trimap = as_trimap(trimap)
    check_same_hw(alpha_hat, trimap, names=("alpha_hat", "trimap"))
    band_fg, band_bg, n = _bands(trimap)
    if n == 0:
        warnings.warn("trimap has no definite-region boundary", DiagnosticWarning)
        return 0.0
    s = np.sum(alpha_hat[band_bg] ** 2) + np.sum((1.0 - alpha_hat[band_fg]) ** 2)
    return float(s / n)


def loss_c2(alpha_hat, alpha_init, trimap) -> float:
    """Squared mean absolute change over the unknown region."""
    alpha_hat = as_plane(alpha_hat, "alpha_hat")
    alpha_init = as_plane(alpha_init, "alpha_init")
    trimap = as_trimap(trimap)
    check_same_hw(alpha_hat, alpha_init, trimap, names=("alpha_hat", "alpha_init", "trimap"))
    unknown = trimap == UNKNOWN
    if not unknown.any():
        warnings.warn("trimap has no unknown region", DiagnosticWarning)
        return 0.0
    m = np.sum(np.abs(alpha_hat[unknown] - alpha_init[unknown])) / unknown.sum()
    return float(m * m)


def _loss_and_pixel_grad(alpha_hat, alpha_init, trimap, c2_weight, bands):
    band_fg, band_bg, n = bands
    unknown = trimap == UNKNOWN
    nu = int(unknown.sum())
    g = np.zeros_like(alpha_hat)
    c1 = 0.0
    if n:
        c1 = float(
            (np.sum(alpha_hat[band_bg] ** 2) + np.sum((1.0 - alpha_hat[band_fg]) ** 2)) / n
        )
        g[band_bg] += 2.0 * alpha_hat[band_bg] / n
        g[band_fg] -= 2.0 * (1.0 - alpha_hat[band_fg]) / n
    c2 = 0.0
    if nu:
        d = alpha_hat[unknown] - alpha_init[unknown]
        m = np.sum(np.abs(d)) / nu
        c2 = float(m * m)
        g[unknown] += c2_weight * 2.0 * m * np.sign(d) / nu
    return c1, c2, g


def br_gradients(alpha_init, a, b, trimap, cfg: BrConfig | None = None):
    """Gradients of ``C1 + c2_weight * C2`` with respect to the grids ``(a, b)``.

    The subgradient of ``|x|`` at 0 is taken as 0.
    """
    cfg = cfg or BrConfig()
    alpha_init = as_plane(alpha_init, "alpha_init")
    trimap = as_trimap(trimap)
    check_same_hw(alpha_init, trimap, names=("alpha_init", "trimap"))
    a = as_plane(a, "a")
    b = as_plane(b, "b")
    _, _, _, ga, gb = _step_terms(alpha_init, a, b, trimap, cfg.c2_weight, _bands(trimap))
    return ga, gb


def _step_terms(alpha_init, a, b, trimap, c2_weight, bands):
    h, w = alpha_init.shape
    scale = np.exp(interp_upsample(a, h, w))
    alpha_hat = scale * alpha_init + interp_upsample(b, h, w)
    c1, c2, g = _loss_and_pixel_grad(alpha_hat, alpha_init, trimap, c2_weight, bands)
    gb = resize_adjoint(g, *b.shape)
    ga = resize_adjoint(g * scale * alpha_init, *a.shape)
    return c1, c2, alpha_hat, ga, gb


def br_refine(alpha_init, trimap, cfg: BrConfig | None = None):
    """Refine ``alpha_init`` by gradient descent on the refinement grids.

    Returns ``(alpha, history)``. ``history`` holds one :class:`HistoryEntry`
    per iteration plus a final entry, each evaluated before that step's
    update. The returned matte is clamped to [0, 1] and forced to 1/0 on the
    definite foreground/background. A trimap with no boundary bands leaves
    ``alpha_init`` untouched and yields an empty history.
    """
    cfg = cfg or BrConfig()
    alpha_init = as_plane(alpha_init, "alpha_init")
    trimap = as_trimap(trimap)
    check_same_hw(alpha_init, trimap, names=("alpha_init", "trimap"))
    bands = _bands(trimap)
    if bands[2] == 0:
        warnings.warn("trimap has no definite-region boundary; nothing to refine", DiagnosticWarning)
        return alpha_init.copy(), []
    a = zero_grid(cfg.grid_size)
    b = zero_grid(cfg.grid_size)
    history = []
    for it in range(cfg.iters + 1):
        c1, c2, alpha_hat, ga, gb = _step_terms(alpha_init, a, b, trimap, cfg.c2_weight, bands)
        history.append(HistoryEntry(it, c1, c2, c1 + cfg.c2_weight * c2))
        if it == cfg.iters:
            break
        a = a - cfg.lr * ga
        b = b - cfg.lr * gb
    out = np.clip(alpha_hat, 0.0, 1.0)
    out[trimap == FG] = 1.0
    out[trimap == BG] = 0.0
    return out, history
