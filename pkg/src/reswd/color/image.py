"""PNG-backed RGB image container with box-filter downscaling."""

from __future__ import annotations

from dataclasses import dataclass

import cv2
import numpy as np

__all__ = ["RgbImage", "LabImage", "resize_max_dim", "read_png", "write_png"]


@dataclass(frozen=True)
class RgbImage:
    """H x W x 3 sRGB-encoded pixels in [0, 1]."""

    pixels: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.pixels, dtype=np.float64)
        if arr.ndim != 3 or arr.shape[2] != 3 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"pixels must be (H, W, 3), got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("pixels contain non-finite values")
        object.__setattr__(self, "pixels", np.clip(arr, 0.0, 1.0))

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    def flatten(self) -> np.ndarray:
        """(H*W, 3) view of the pixels as a sample set."""
        return self.pixels.reshape(-1, 3)


@dataclass(frozen=True)
class LabImage:
    """H x W x 3 CIELAB pixels; L in [0, 100], a/b unbounded."""

    pixels: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.pixels, dtype=np.float64)
        if arr.ndim != 3 or arr.shape[2] != 3:
            raise ValueError(f"pixels must be (H, W, 3), got shape {arr.shape}")
        object.__setattr__(self, "pixels", arr)


def _resample_weights(n_in: int, n_out: int) -> np.ndarray:
    """(n_out, n_in) row-stochastic box-filter matrix for area-average downscale."""
    w = np.zeros((n_out, n_in))
    scale = n_in / n_out
    for i in range(n_out):
        lo = i * scale
        hi = (i + 1) * scale
        j0 = int(np.floor(lo))
        j1 = int(np.ceil(hi))
        for j in range(j0, min(j1, n_in)):
            overlap = min(hi, j + 1) - max(lo, j)
            if overlap > 0:
                w[i, j] = overlap
    return w / w.sum(axis=1, keepdims=True)


def resize_max_dim(img: RgbImage, max_dim: int = 128) -> RgbImage:
    """Aspect-preserving area-average downscale; never upscales."""
    if max_dim < 1:
        raise ValueError(f"max_dim must be >= 1, got {max_dim}")
    h, w = img.height, img.width
    if max(h, w) <= max_dim:
        return img
    if w >= h:
        new_w = max_dim
        new_h = max(1, round(h * max_dim / w))
    else:
        new_h = max_dim
        new_w = max(1, round(w * max_dim / h))
    rows = _resample_weights(h, new_h)
    cols = _resample_weights(w, new_w)
    out = np.einsum("ih,hwc,jw->ijc", rows, img.pixels, cols, optimize=True)
    return RgbImage(out)


def read_png(path: str) -> RgbImage:
    """Load an 8- or 16-bit PNG (or other OpenCV-readable image) as RgbImage."""
    raw = cv2.imread(str(path), cv2.IMREAD_UNCHANGED)
    if raw is None:
        raise IOError(f"cannot read image: {path}")
    if raw.dtype == np.uint8:
        arr = raw.astype(np.float64) / 255.0
    elif raw.dtype == np.uint16:
        arr = raw.astype(np.float64) / 65535.0
    else:
        arr = np.asarray(raw, dtype=np.float64)
    if arr.ndim == 2:
        arr = np.repeat(arr[:, :, None], 3, axis=2)
    elif arr.shape[2] == 4:
        arr = arr[:, :, :3]
    if arr.shape[2] == 3:
        arr = arr[:, :, ::-1]  # BGR -> RGB
    return RgbImage(arr)


def write_png(path: str, img: RgbImage, bit_depth: int = 8) -> None:
    """Write an RgbImage to PNG at 8 or 16 bits per channel."""
    if bit_depth == 8:
        arr = np.round(img.pixels * 255.0).astype(np.uint8)
    elif bit_depth == 16:
        arr = np.round(img.pixels * 65535.0).astype(np.uint16)
    else:
        raise ValueError(f"bit_depth must be 8 or 16, got {bit_depth}")
    ok = cv2.imwrite(str(path), arr[:, :, ::-1])
    if not ok:
        raise IOError(f"cannot write image: {path}")
