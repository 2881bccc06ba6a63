"""Deterministic synthetic matting fixtures.

``aim_style`` mimics a training pair from a composition dataset: a soft
matte around a blob-shaped object and a foreground whose colors are only
meaningful where alpha > 0, with unrelated high-frequency clutter elsewhere.
``br_violation`` pairs a clean matte and its dilation trimap with a
prediction whose band pixels were pushed away from 0/1.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np
import scipy.ndimage as ndi

from .augment import gen_trimap
from .core import trimap_bands

AIM_SEEDS = (0, 1, 2, 3)
BR_SEEDS = tuple(range(10))


class AimFixture(NamedTuple):
    fg: np.ndarray
    alpha: np.ndarray
    bg: np.ndarray


class BrFixture(NamedTuple):
    alpha_gt: np.ndarray
    trimap: np.ndarray
    alpha_init: np.ndarray


def blob_matte(rng: np.random.Generator, size: int, softness: float = 4.0) -> np.ndarray:
    """Smooth random blob, fully opaque in its core and fading out over ``softness`` px."""
    y, x = np.mgrid[:size, :size].astype(np.float64)
    field = np.zeros((size, size))
    for _ in range(int(rng.integers(2, 5))):
        cy, cx = rng.uniform(0.3, 0.7, size=2) * size
        s = rng.uniform(0.08, 0.16) * size
        field += np.exp(-((y - cy) ** 2 + (x - cx) ** 2) / (2 * s * s))
    level = 0.5
    # signed distance-like ramp from the level set, scaled to the requested softness
    gy, gx = np.gradient(field)
    g = np.maximum(np.hypot(gy, gx), 1e-6)
    ramp = (field - level) / g / softness + 0.5
    return np.clip(ramp, 0.0, 1.0)


def aim_style(seed: int, size: int = 128) -> AimFixture:
    rng = np.random.default_rng(seed)
    alpha = blob_matte(rng, size)
    y, x = np.mgrid[:size, :size] / size
    base = np.stack(
        [0.5 + 0.3 * np.sin(2.0 * x + c) * np.cos(1.5 * y - c) for c in rng.uniform(0, 3, 3)],
        axis=2,
    )
    texture = ndi.gaussian_filter(rng.normal(0.0, 0.04, (size, size, 3)), (1.5, 1.5, 0))
    fg_obj = base + texture
    # clutter: blocky noise plus stripes, unrelated to the object colors
    blocks = rng.uniform(0.0, 1.0, (size // 4 + 1, size // 4 + 1, 3))
    clutter = np.kron(blocks, np.ones((4, 4, 1)))[:size, :size]
    clutter = 0.6 * clutter + 0.4 * rng.uniform(0.0, 1.0, (size, size, 3))
    near = ndi.binary_dilation(alpha > 0, iterations=2)
    fg = np.where(near[..., None], fg_obj, clutter)
    bg = ndi.gaussian_filter(rng.uniform(0.0, 1.0, (size, size, 3)), (4, 4, 0))
    return AimFixture(np.clip(fg, 0.0, 1.0), alpha, np.clip(bg, 0.0, 1.0))


def br_violation(seed: int, size: int = 96, max_error: float = 0.5) -> BrFixture:
    """Clean matte, its trimap, and a prediction with band errors up to ``max_error``."""
    rng = np.random.default_rng(1000 + seed)
    gt = blob_matte(rng, size, softness=float(rng.uniform(3.0, 6.0)))
    r_fg, r_bg = (int(r) for r in rng.integers(3, 9, size=2))
    trimap = gen_trimap(gt, r_fg, r_bg)
    band_fg, band_bg = trimap_bands(trimap)
    init = gt.copy()
    # errors on a random subset of band pixels, spatially correlated
    noise = ndi.gaussian_filter(rng.uniform(0.0, 1.0, (size, size)), 1.5)
    noise = (noise - noise.min()) / (noise.max() - noise.min())
    err = max_error * noise
    pick = rng.uniform(size=(size, size)) < 0.7
    init[band_fg & pick] -= err[band_fg & pick]
    init[band_bg & pick] += err[band_bg & pick]
    return BrFixture(gt, trimap, np.clip(init, 0.0, 1.0))
