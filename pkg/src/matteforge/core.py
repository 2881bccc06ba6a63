"""Domain types and basic geometry shared by every other module.

Images are plain NumPy arrays:

* a *plane* is an ``(H, W)`` float64 array (alpha mattes, single channels),
* a *color image* is an ``(H, W, 3)`` float64 array with values in [0, 1],
* a *trimap* is an ``(H, W)`` float64 array over ``{BG, UNKNOWN, FG}``,
  i.e. ``{0.0, 0.5, 1.0}``,
* a *mask* is an ``(H, W)`` boolean array.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

BG = 0.0
UNKNOWN = 0.5
FG = 1.0


class ShapeError(ValueError):
    """Inputs do not share the required dimensions."""


class ConfigError(ValueError):
    """A parameter is outside its admissible range."""


class DiagnosticWarning(UserWarning):
    """A computation degenerated (e.g. an empty region) and returned a neutral value."""


def as_plane(x, name: str = "plane") -> np.ndarray:
    a = np.asarray(x, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise ShapeError(f"{name} must be a non-empty 2-D array, got shape {a.shape}")
    return a


def as_color(x, name: str = "image") -> np.ndarray:
    a = np.asarray(x, dtype=np.float64)
    if a.ndim != 3 or a.shape[2] != 3 or a.shape[0] < 1 or a.shape[1] < 1:
        raise ShapeError(f"{name} must have shape (H, W, 3), got {a.shape}")
    return a


def as_trimap(x, name: str = "trimap") -> np.ndarray:
    t = as_plane(x, name)
    if not np.all((t == BG) | (t == UNKNOWN) | (t == FG)):
        raise ValueError(f"{name} values must lie in {{0, 0.5, 1}}")
    return t


def check_same_hw(*arrays, names=None) -> tuple[int, int]:
    hw = {a.shape[:2] for a in arrays}
    if len(hw) != 1:
        shapes = [a.shape for a in arrays]
        label = ", ".join(names) if names else "inputs"
        raise ShapeError(f"{label} must share height and width, got {shapes}")
    return arrays[0].shape[:2]


def composite(fg, bg, alpha) -> np.ndarray:
    """Blend ``fg`` over ``bg`` with opacity ``alpha``: ``alpha*F + (1-alpha)*B``."""
    fg = as_color(fg, "fg")
    bg = as_color(bg, "bg")
    alpha = as_plane(alpha, "alpha")
    check_same_hw(fg, bg, alpha, names=("fg", "bg", "alpha"))
    if alpha.min() < 0.0 or alpha.max() > 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    a = alpha[..., None]
    return a * fg + (1.0 - a) * bg


def neighbors4(pos: tuple[int, int], dims: tuple[int, int]) -> set[tuple[int, int]]:
    """In-grid up/down/left/right neighbours of ``pos`` in a grid of shape ``dims``."""
    y, x = pos
    h, w = dims
    if not (0 <= y < h and 0 <= x < w):
        raise IndexError(f"position {pos} outside grid {dims}")
    out = set()
    for dy, dx in ((-1, 0), (1, 0), (0, -1), (0, 1)):
        ny, nx = y + dy, x + dx
        if 0 <= ny < h and 0 <= nx < w:
            out.add((ny, nx))
    return out


def neighbor_count(dims: tuple[int, int]) -> np.ndarray:
    """Number of in-grid 4-neighbours of every pixel."""
    h, w = dims
    n = np.full((h, w), 4, dtype=np.int64)
    n[0, :] -= 1
    n[-1, :] -= 1
    n[:, 0] -= 1
    n[:, -1] -= 1
    return n


def _touches(mask: np.ndarray) -> np.ndarray:
    """True where the closed 4-neighbourhood of a pixel contains a true pixel."""
    out = mask.copy()
    out[1:, :] |= mask[:-1, :]
    out[:-1, :] |= mask[1:, :]
    out[:, 1:] |= mask[:, :-1]
    out[:, :-1] |= mask[:, 1:]
    return out


def region_boundary(mask) -> np.ndarray:
    """Pixels whose closed 4-neighbourhood meets both the region and its complement."""
    m = np.asarray(mask, dtype=bool)
    if m.ndim != 2:
        raise ShapeError(f"mask must be 2-D, got shape {m.shape}")
    return _touches(m) & _touches(~m)


def trimap_bands(trimap) -> tuple[np.ndarray, np.ndarray]:
    """Boundary bands ``(band_fg, band_bg)`` of the definite-FG and definite-BG regions."""
    t = as_trimap(trimap)
    return region_boundary(t == FG), region_boundary(t == BG)


class Assumption2Report(NamedTuple):
    max_fg_dev: float
    max_bg_dev: float
    mean_dev: float


def assumption2_violation(alpha, trimap) -> Assumption2Report:
    """How far ``alpha`` is from 1 on the FG band and from 0 on the BG band.

    Empty bands contribute no terms; if both are empty every field is 0.
    """
    alpha = as_plane(alpha, "alpha")
    trimap = as_trimap(trimap)
    check_same_hw(alpha, trimap, names=("alpha", "trimap"))
    band_fg, band_bg = trimap_bands(trimap)
    dev_fg = np.abs(1.0 - alpha[band_fg])
    dev_bg = np.abs(alpha[band_bg])
    allv = np.concatenate([dev_fg, dev_bg])
    return Assumption2Report(
        float(dev_fg.max()) if dev_fg.size else 0.0,
        float(dev_bg.max()) if dev_bg.size else 0.0,
        float(allv.mean()) if allv.size else 0.0,
    )


def forward_gradient_magnitude(img) -> np.ndarray:
    """Per-pixel forward-difference gradient magnitude (channels pooled in quadrature).

    The last row/column use a zero difference.
    """
    a = np.asarray(img, dtype=np.float64)
    if a.ndim == 2:
        a = a[..., None]
    dy = np.zeros_like(a)
    dx = np.zeros_like(a)
    dy[:-1] = a[1:] - a[:-1]
    dx[:, :-1] = a[:, 1:] - a[:, :-1]
    return np.sqrt(np.sum(dy * dy + dx * dx, axis=2))


def assumption1_region(alpha) -> np.ndarray:
    """The zero-opacity region together with its boundary band."""
    zero = as_plane(alpha, "alpha") == 0.0
    return zero | region_boundary(zero)


def assumption1_gradient(fg, alpha) -> float:
    """Mean foreground gradient magnitude over the zero-opacity region and its band.

    Returns 0.0 when the region is empty.
    """
    fg = as_color(fg, "fg")
    alpha = as_plane(alpha, "alpha")
    check_same_hw(fg, alpha, names=("fg", "alpha"))
    region = assumption1_region(alpha)
    if not region.any():
        return 0.0
    return float(forward_gradient_magnitude(fg)[region].mean())


def gradient_vs_alpha(fg, alpha, bins: int = 10) -> list[tuple[float, float, int]]:
    """Mean foreground gradient per alpha bin inside ``0 < alpha < 1``.

    Returns ``(bin_center, mean_gradient, count)`` for every non-empty bin.
    """
    fg = as_color(fg, "fg")
    alpha = as_plane(alpha, "alpha")
    check_same_hw(fg, alpha, names=("fg", "alpha"))
    g = forward_gradient_magnitude(fg)
    sel = (alpha > 0.0) & (alpha < 1.0)
    a, gv = alpha[sel], g[sel]
    idx = np.minimum((a * bins).astype(np.int64), bins - 1)
    out = []
    for b in range(bins):
        m = idx == b
        if m.any():
            out.append(((b + 0.5) / bins, float(gv[m].mean()), int(m.sum())))
    return out
