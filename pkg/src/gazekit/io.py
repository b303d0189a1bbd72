"""Raster file I/O at the package boundary (PNG and JPEG via Pillow)."""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image

from .image import to_grayscale

_FORMATS = {".png": "PNG", ".jpg": "JPEG", ".jpeg": "JPEG"}


def read_raster(path: str | Path) -> np.ndarray:
    """Read an image file as uint8, (H, W) for grayscale or (H, W, 3) for color."""
    with Image.open(path) as im:
        if im.mode in ("L", "I;16", "I"):
            arr = np.asarray(im.convert("L"), dtype=np.uint8)
        else:
            arr = np.asarray(im.convert("RGB"), dtype=np.uint8)
    return arr


def read_grayscale(path: str | Path) -> np.ndarray:
    """Read an image file and reduce it to a grayscale raster."""
    arr = read_raster(path)
    if arr.ndim == 3:
        arr = to_grayscale(arr)
    return arr


def write_raster(path: str | Path, arr: np.ndarray) -> None:
    """Write a uint8 raster; the format is chosen by the file suffix."""
    path = Path(path)
    fmt = _FORMATS.get(path.suffix.lower())
    if fmt is None:
        raise ValueError(f"unsupported raster suffix {path.suffix!r}; "
                         f"use one of {sorted(_FORMATS)}")
    arr = np.asarray(arr)
    if arr.dtype != np.uint8 or arr.ndim not in (2, 3):
        raise ValueError("expected a uint8 array of shape (H, W) or (H, W, 3)")
    Image.fromarray(arr).save(path, format=fmt)
