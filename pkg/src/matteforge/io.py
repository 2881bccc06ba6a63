"""PNG reading/writing and the JSON-lines dataset manifest."""
from __future__ import annotations

import json
import os
import uuid
import warnings
from dataclasses import dataclass
from pathlib import Path

import cv2
import numpy as np

from .core import BG, FG, UNKNOWN, ShapeError, as_trimap

_MAXVAL = {8: 255, 16: 65535}
_DTYPE = {8: np.uint8, 16: np.uint16}


def _read(path) -> np.ndarray:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such image: {path}")
    raw = cv2.imread(str(path), cv2.IMREAD_UNCHANGED)
    if raw is None:
        raise OSError(f"cannot decode image: {path}")
    if raw.dtype not in (np.uint8, np.uint16):
        raise OSError(f"unsupported bit depth {raw.dtype} in {path}")
    if raw.size == 0:
        raise OSError(f"image has a zero dimension: {path}")
    return raw


def _normalize(raw: np.ndarray) -> np.ndarray:
    return raw.astype(np.float64) / (255.0 if raw.dtype == np.uint8 else 65535.0)


def load_image(path) -> np.ndarray:
    """Read an RGB(A) or grayscale PNG as an (H, W, 3) float image in [0, 1]."""
    raw = _read(path)
    if raw.ndim == 2:
        raw = np.repeat(raw[..., None], 3, axis=2)
    elif raw.shape[2] == 4:
        warnings.warn(f"ignoring alpha channel of {path}", UserWarning)
        raw = raw[..., :3]
    if raw.ndim == 3 and raw.shape[2] == 3:
        raw = raw[..., ::-1]  # BGR -> RGB
    return np.ascontiguousarray(_normalize(raw))


def load_plane(path) -> np.ndarray:
    """Read a single-channel PNG as an (H, W) float plane in [0, 1].

    Color files contribute their first (red) channel, with a warning.
    """
    raw = _read(path)
    if raw.ndim == 3:
        warnings.warn(f"{path} has {raw.shape[2]} channels; using the first", UserWarning)
        raw = raw[..., 2] if raw.shape[2] >= 3 else raw[..., 0]
    return _normalize(raw)


def load_trimap(path) -> np.ndarray:
    """Read a trimap: below 64 is BG, above 191 is FG, anything else unknown (8-bit scale)."""
    raw = _read(path)
    if raw.ndim == 3:
        raw = raw[..., 0]
    v = raw.astype(np.float64)
    if raw.dtype == np.uint16:
        v = v / 257.0
    t = np.full(v.shape, UNKNOWN)
    t[v < 64] = BG
    t[v > 191] = FG
    return t


def quantize(data, bit_depth: int) -> np.ndarray:
    """Scale [0, 1] data to integers, rounding halves away from zero."""
    if bit_depth not in _MAXVAL:
        raise ValueError(f"bit_depth must be 8 or 16, got {bit_depth}")
    a = np.asarray(data, dtype=np.float64)
    if a.size and (np.nanmin(a) < 0.0 or np.nanmax(a) > 1.0):
        raise ValueError("data must lie in [0, 1]")
    return np.floor(a * _MAXVAL[bit_depth] + 0.5).astype(_DTYPE[bit_depth])


def _write(path, arr: np.ndarray) -> None:
    path = Path(path)
    parent = path.parent if str(path.parent) else Path(".")
    if not parent.is_dir():
        raise FileNotFoundError(f"output directory does not exist: {parent}")
    tmp = str(parent / f".{path.stem}.{uuid.uuid4().hex}.png")
    try:
        if not cv2.imwrite(tmp, arr):
            raise OSError(f"failed to encode {path}")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_image(path, data, bit_depth: int = 8) -> None:
    """Write an (H, W, 3) float image in [0, 1] as an RGB PNG (8-bit by default)."""
    a = np.asarray(data, dtype=np.float64)
    if a.ndim != 3 or a.shape[2] != 3:
        raise ShapeError(f"color image must have shape (H, W, 3), got {a.shape}")
    _write(path, np.ascontiguousarray(quantize(a, bit_depth)[..., ::-1]))


def save_plane(path, data, bit_depth: int = 16) -> None:
    """Write an (H, W) float plane in [0, 1] as a grayscale PNG (16-bit by default)."""
    a = np.asarray(data, dtype=np.float64)
    if a.ndim != 2:
        raise ShapeError(f"plane must be 2-D, got shape {a.shape}")
    _write(path, quantize(a, bit_depth))


def save_trimap(path, trimap) -> None:
    """Write a trimap as an 8-bit PNG with values {0, 128, 255}."""
    t = as_trimap(trimap)
    out = np.full(t.shape, 128, dtype=np.uint8)
    out[t == BG] = 0
    out[t == FG] = 255
    _write(path, out)


@dataclass(frozen=True)
class ManifestEntry:
    fg_path: Path | None
    alpha_path: Path
    bg_path: Path | None = None
    trimap_path: Path | None = None
    pred_path: Path | None = None


_KEYS = ("fg_path", "alpha_path", "bg_path", "trimap_path", "pred_path")


@dataclass(frozen=True)
class DatasetManifest:
    root: Path
    entries: tuple[ManifestEntry, ...]


def load_manifest(path) -> DatasetManifest:
    """Read a JSON-lines manifest; relative paths resolve against its directory.

    Each non-blank line is an object with ``alpha_path`` and any of
    ``fg_path``, ``bg_path``, ``trimap_path``, ``pred_path``. Lines starting
    with ``#`` are comments.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such manifest: {path}")
    root = path.parent
    entries = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{lineno}: invalid JSON ({exc})") from None
            if not isinstance(rec, dict) or "alpha_path" not in rec:
                raise ValueError(f"{path}:{lineno}: record needs an alpha_path")
            extra = set(rec) - set(_KEYS)
            if extra:
                raise ValueError(f"{path}:{lineno}: unknown keys {sorted(extra)}")
            resolved = {}
            for k in _KEYS:
                v = rec.get(k)
                if v is None:
                    resolved[k] = None
                    continue
                p = Path(v)
                p = p if p.is_absolute() else root / p
                if not p.is_file():
                    raise FileNotFoundError(f"{path}:{lineno}: missing file {p}")
                resolved[k] = p
            entries.append(ManifestEntry(**resolved))
    if not entries:
        raise ValueError(f"manifest {path} has no entries")
    return DatasetManifest(root, tuple(entries))
