"""Training-data augmentation, trimap generation and the test-time transform plan.

Random draws go through ``numpy.random.Generator`` objects passed in by the
caller. :func:`sample_training_patch` consumes its generator in a fixed
order (documented on the function) so a seed pins the output.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import scipy.ndimage as ndi

from .core import (
    BG,
    FG,
    UNKNOWN,
    ConfigError,
    as_color,
    as_plane,
    check_same_hw,
)
from .resize import resize

TRIMAP_RADIUS_RANGE = (1, 24)


@dataclass(frozen=True)
class AugmentConfig:
    rotate_prob: float = 0.5
    flip_prob: float = 0.5
    gamma_prob: float = 0.3
    gamma_range: tuple[float, float] = (0.5, 1.5)
    invert_prob: float = 0.3
    permute_prob: float = 0.3
    crop_scale_range: tuple[float, float] = (0.75, 1.25)
    dilation_range: tuple[int, int] = (1, 24)
    blur_prob: float = 0.0
    blur_sigma_range: tuple[float, float] = (0.5, 2.0)
    color_aug_prob: float = 0.0
    rotate_max_deg: float = 45.0
    patch_size: int = 320
    seed: int = 0

    def __post_init__(self):
        for name in ("rotate_prob", "flip_prob", "gamma_prob", "invert_prob",
                     "permute_prob", "blur_prob", "color_aug_prob"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1], got {p}")
        for name in ("gamma_range", "crop_scale_range", "dilation_range", "blur_sigma_range"):
            lo, hi = getattr(self, name)
            if not lo < hi:
                raise ConfigError(f"{name} must be a non-degenerate interval, got {(lo, hi)}")
        lo, hi = self.dilation_range
        if lo < TRIMAP_RADIUS_RANGE[0] or hi > TRIMAP_RADIUS_RANGE[1]:
            raise ConfigError(f"dilation_range must lie within {TRIMAP_RADIUS_RANGE}")
        if self.gamma_range[0] < 0.5 or self.gamma_range[1] > 1.5:
            raise ConfigError("gamma_range must lie within [0.5, 1.5]")
        if self.patch_size < 32:
            raise ConfigError(f"patch_size must be >= 32, got {self.patch_size}")

    @classmethod
    def from_dict(cls, d: dict) -> "AugmentConfig":
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown augment config keys: {sorted(unknown)}")
        kw = {k: tuple(v) if isinstance(v, list) else v for k, v in d.items()}
        return cls(**kw)


class GammaMode(Enum):
    FG_SIDE = "fg"
    BG_SIDE = "bg"


@dataclass(frozen=True)
class TtaTransform:
    scale: float
    quarter_turns: int
    flipped: bool

    def apply(self, img) -> np.ndarray:
        """Scale, then rotate counter-clockwise, then flip left-right."""
        a = np.asarray(img, dtype=np.float64)
        if self.scale != 1.0:
            h, w = a.shape[:2]
            a = resize(a, max(1, round(h * self.scale)), max(1, round(w * self.scale)))
        a = np.rot90(a, self.quarter_turns, axes=(0, 1))
        if self.flipped:
            a = a[:, ::-1]
        return np.ascontiguousarray(a)

    def invert(self, img, height: int, width: int) -> np.ndarray:
        """Map an output of :meth:`apply` back onto the original ``height x width`` grid."""
        a = np.asarray(img, dtype=np.float64)
        if self.flipped:
            a = a[:, ::-1]
        a = np.rot90(a, -self.quarter_turns, axes=(0, 1))
        if a.shape[:2] != (height, width):
            a = resize(a, height, width)
        return np.ascontiguousarray(a)


TTA_SCALES = (0.8, 1.0, 1.25)


def tta_plan() -> list[TtaTransform]:
    """All 24 scale/rotation/flip combinations."""
    return [
        TtaTransform(s, k, f)
        for s in TTA_SCALES
        for k in range(4)
        for f in (False, True)
    ]


def tta_average(predict, image) -> np.ndarray:
    """Average ``predict`` over the 24 transformed copies of ``image``, mapped back."""
    image = np.asarray(image, dtype=np.float64)
    h, w = image.shape[:2]
    acc = None
    plan = tta_plan()
    for t in plan:
        out = t.invert(predict(t.apply(image)), h, w)
        acc = out if acc is None else acc + out
    return acc / len(plan)


def color_augment(fg, u, w: float) -> np.ndarray:
    """Blend the foreground toward a constant color: ``w*F + (1-w)*u``."""
    fg = as_color(fg, "fg")
    u = np.asarray(u, dtype=np.float64)
    if u.shape != (3,) or u.min() < 0.0 or u.max() > 1.0:
        raise ValueError("u must be a color triple in [0, 1]")
    if not 0.0 <= w <= 1.0:
        raise ValueError(f"w must lie in [0, 1], got {w}")
    return w * fg + (1.0 - w) * u


def gamma_warp(alpha, gamma: float, mode: GammaMode) -> np.ndarray:
    """``alpha**gamma`` (FG_SIDE) or ``1 - (1 - alpha)**gamma`` (BG_SIDE)."""
    alpha = as_plane(alpha, "alpha")
    if not 0.5 <= gamma <= 1.5:
        raise ValueError(f"gamma must lie in [0.5, 1.5], got {gamma}")
    mode = GammaMode(mode)
    if mode is GammaMode.FG_SIDE:
        return alpha**gamma
    return 1.0 - (1.0 - alpha) ** gamma


def invert_colors(fg) -> np.ndarray:
    return 1.0 - as_color(fg, "fg")


def permute_channels(fg, perm) -> np.ndarray:
    """Output channel ``c`` is input channel ``perm[c]`` (0-based)."""
    fg = as_color(fg, "fg")
    perm = tuple(int(p) for p in perm)
    if sorted(perm) != [0, 1, 2]:
        raise ValueError(f"{perm} is not a permutation of (0, 1, 2)")
    return fg[..., list(perm)]


def disk(radius: int) -> np.ndarray:
    r = int(radius)
    y, x = np.mgrid[-r:r + 1, -r:r + 1]
    return x * x + y * y <= r * r


def dilate(mask, radius: int) -> np.ndarray:
    """Binary dilation by a Euclidean disk."""
    m = np.asarray(mask, dtype=bool)
    if not m.any():
        return m.copy()
    return ndi.binary_dilation(m, structure=disk(radius))


def gen_trimap(alpha, r_fg: int, r_bg: int) -> np.ndarray:
    """Trimap from a matte by dilating ``{alpha > 0}`` and ``{alpha < 1}``.

    Unknown is where both dilations overlap; the rest is FG where alpha is 1
    and BG where alpha is 0, so the definite labels never contradict alpha.
    """
    alpha = as_plane(alpha, "alpha")
    lo, hi = TRIMAP_RADIUS_RANGE
    for name, r in (("r_fg", r_fg), ("r_bg", r_bg)):
        if not lo <= r <= hi:
            raise ConfigError(f"{name} must lie in [{lo}, {hi}], got {r}")
    unknown = dilate(alpha > 0.0, r_bg) & dilate(alpha < 1.0, r_fg)
    t = np.full(alpha.shape, UNKNOWN)
    t[(alpha >= 1.0) & ~unknown] = FG
    t[(alpha <= 0.0) & ~unknown] = BG
    return t


def gaussian_kernel1d(sigma: float) -> np.ndarray:
    """Normalised Gaussian taps truncated at 3 sigma."""
    r = max(1, int(np.ceil(3.0 * sigma)))
    x = np.arange(-r, r + 1, dtype=np.float64)
    k = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return k / k.sum()


def gaussian_blur(img, sigma: float) -> np.ndarray:
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    a = np.asarray(img, dtype=np.float64)
    k = gaussian_kernel1d(sigma)
    a = ndi.correlate1d(a, k, axis=0, mode="nearest")
    return ndi.correlate1d(a, k, axis=1, mode="nearest")


def blur_pair(fg, bg, sigma: float):
    return gaussian_blur(as_color(fg, "fg"), sigma), gaussian_blur(as_color(bg, "bg"), sigma)


def _rotate(img, angle_deg: float) -> np.ndarray:
    axes = (1, 0)
    return ndi.rotate(img, angle_deg, axes=axes, reshape=False, order=1, mode="reflect")


def _crop(img, cy: int, cx: int, k: int) -> np.ndarray:
    """``k x k`` window whose centre pixel is ``(cy, cx)``, reflection-padded where needed."""
    h, w = img.shape[:2]
    y0 = cy - k // 2
    x0 = cx - k // 2
    pad_t, pad_l = max(0, -y0), max(0, -x0)
    pad_b, pad_r = max(0, y0 + k - h), max(0, x0 + k - w)
    if pad_t or pad_l or pad_b or pad_r:
        widths = [(pad_t, pad_b), (pad_l, pad_r)] + [(0, 0)] * (img.ndim - 2)
        img = np.pad(img, widths, mode="symmetric")
        y0 += pad_t
        x0 += pad_l
    return img[y0:y0 + k, x0:x0 + k]


@dataclass
class TrainingPatch:
    fg: np.ndarray
    alpha: np.ndarray
    bg: np.ndarray | None
    trimap: np.ndarray
    applied: dict = field(default_factory=dict)


def sample_training_patch(fg, alpha, bg, cfg: AugmentConfig, rng: np.random.Generator) -> TrainingPatch:
    """Draw one augmented ``patch_size`` x ``patch_size`` training sample.

    Steps, each consuming ``rng`` in this order:

    1. rotation: ``random() < rotate_prob``, then an angle uniform in
       ``[-rotate_max_deg, rotate_max_deg]`` (shared by fg, alpha and bg);
    2. crop: side ``k`` uniform integer in ``crop_scale_range * patch_size``,
       a centre drawn uniformly from ``{alpha > 0}``, then (if ``bg``) a
       background centre uniform over the background; windows are
       reflection-padded and resized to the patch size;
    3. flip: ``random() < flip_prob``;
    4. gamma: ``random() < gamma_prob``, gamma uniform in ``gamma_range``,
       side chosen by ``random() < 0.5``;
    5. invert: ``random() < invert_prob``;
    6. permute: ``random() < permute_prob``, then ``permutation(3)``;
    7. color augmentation: ``random() < color_aug_prob``, ``u`` uniform in
       [0, 1]^3, ``w`` uniform in [0, 1];
    8. blur: ``random() < blur_prob``, sigma uniform in ``blur_sigma_range``
       (needs ``bg``; without it only fg is blurred);
    9. trimap radii: two integers uniform in ``dilation_range``
       (``r_fg`` then ``r_bg``).

    Parameters are drawn only for steps that fire, so the stream position
    depends on which steps fired before.
    """
    fg = as_color(fg, "fg")
    alpha = as_plane(alpha, "alpha")
    check_same_hw(fg, alpha, names=("fg", "alpha"))
    if bg is not None:
        bg = as_color(bg, "bg")
    if not (alpha > 0).any():
        raise ValueError("alpha has no foreground pixels to centre a crop on")
    hp = cfg.patch_size
    applied: dict = {}

    if rng.random() < cfg.rotate_prob:
        angle = float(rng.uniform(-cfg.rotate_max_deg, cfg.rotate_max_deg))
        applied["rotate"] = angle
        fg = np.clip(_rotate(fg, angle), 0.0, 1.0)
        alpha = np.clip(_rotate(alpha, angle), 0.0, 1.0)
        if bg is not None:
            bg = np.clip(_rotate(bg, angle), 0.0, 1.0)
        if not (alpha > 0).any():
            raise ValueError("rotation removed every foreground pixel")

    lo = int(np.ceil(cfg.crop_scale_range[0] * hp))
    hi = int(np.floor(cfg.crop_scale_range[1] * hp))
    k = int(rng.integers(lo, hi + 1))
    ys, xs = np.nonzero(alpha > 0)
    pick = int(rng.integers(len(ys)))
    cy, cx = int(ys[pick]), int(xs[pick])
    applied["crop"] = (cy, cx, k)
    fg = resize(_crop(fg, cy, cx, k), hp, hp)
    alpha = resize(_crop(alpha, cy, cx, k), hp, hp)
    if bg is not None:
        by = int(rng.integers(bg.shape[0]))
        bx = int(rng.integers(bg.shape[1]))
        bg = resize(_crop(bg, by, bx, k), hp, hp)

    if rng.random() < cfg.flip_prob:
        applied["flip"] = True
        fg = fg[:, ::-1]
        alpha = alpha[:, ::-1]
        if bg is not None:
            bg = bg[:, ::-1]

    if rng.random() < cfg.gamma_prob:
        gamma = float(rng.uniform(*cfg.gamma_range))
        mode = GammaMode.FG_SIDE if rng.random() < 0.5 else GammaMode.BG_SIDE
        applied["gamma"] = (gamma, mode.value)
        alpha = gamma_warp(np.clip(alpha, 0.0, 1.0), gamma, mode)

    if rng.random() < cfg.invert_prob:
        applied["invert"] = True
        fg = invert_colors(fg)

    if rng.random() < cfg.permute_prob:
        perm = tuple(int(p) for p in rng.permutation(3))
        applied["permute"] = perm
        fg = permute_channels(fg, perm)

    if rng.random() < cfg.color_aug_prob:
        u = rng.uniform(0.0, 1.0, size=3)
        w = float(rng.uniform(0.0, 1.0))
        applied["color"] = (tuple(float(c) for c in u), w)
        fg = color_augment(fg, u, w)

    if rng.random() < cfg.blur_prob:
        sigma = float(rng.uniform(*cfg.blur_sigma_range))
        applied["blur"] = sigma
        if bg is not None:
            fg, bg = blur_pair(fg, bg, sigma)
        else:
            fg = gaussian_blur(fg, sigma)

    r_fg = int(rng.integers(cfg.dilation_range[0], cfg.dilation_range[1] + 1))
    r_bg = int(rng.integers(cfg.dilation_range[0], cfg.dilation_range[1] + 1))
    applied["trimap_radii"] = (r_fg, r_bg)
    alpha = np.clip(alpha, 0.0, 1.0)
    trimap = gen_trimap(alpha, r_fg, r_bg)
    return TrainingPatch(
        np.ascontiguousarray(np.clip(fg, 0.0, 1.0)),
        np.ascontiguousarray(alpha),
        None if bg is None else np.ascontiguousarray(np.clip(bg, 0.0, 1.0)),
        trimap,
        applied,
    )
