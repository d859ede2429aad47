"""Screenshot decoding and the visual similarity metrics computed on pixels.

All metrics are pure functions over decoded RGB screenshots. Callers are
responsible for size alignment via :func:`pad_pair`; the metrics themselves
refuse mismatched dimensions rather than guessing.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence, Union

import numpy as np
from PIL import Image
from scipy.signal import fftconvolve

from .color import srgb_to_lab
from .resources import BoundingBox


class DimensionMismatch(ValueError):
    """Raised when a metric receives images or vectors of unequal size."""


class EmptyRegionError(ValueError):
    """Raised when a sampling box does not intersect the image."""


# ITU-R BT.601 luma weights
_LUMA = np.array([0.299, 0.587, 0.114])

PSNR_CAP_DB = 100.0


@dataclass(frozen=True)
class RasterImage:
    """Decoded screenshot: row-major 8-bit RGB pixels."""

    array: np.ndarray  # uint8, shape (height, width, 3)

    def __post_init__(self) -> None:
        a = self.array
        if a.ndim != 3 or a.shape[2] != 3 or a.dtype != np.uint8:
            raise ValueError(f"expected uint8 RGB array (h, w, 3), got {a.dtype} {a.shape}")
        if a.shape[0] < 1 or a.shape[1] < 1:
            raise ValueError("image must be at least 1x1")
        a.setflags(write=False)

    @property
    def width(self) -> int:
        return self.array.shape[1]

    @property
    def height(self) -> int:
        return self.array.shape[0]

    @classmethod
    def from_array(cls, array: np.ndarray) -> "RasterImage":
        return cls(np.ascontiguousarray(array, dtype=np.uint8))

    @classmethod
    def load(cls, path: Union[str, Path]) -> "RasterImage":
        with Image.open(path) as img:
            return cls.from_array(np.asarray(img.convert("RGB")))

    def save(self, path: Union[str, Path]) -> None:
        Image.fromarray(self.array, mode="RGB").save(path, format="PNG")

    def grayscale(self) -> np.ndarray:
        """BT.601 luma as float64, shape (height, width)."""
        return self.array.astype(np.float64) @ _LUMA


@dataclass(frozen=True)
class EmbeddingVector:
    """Externally produced image embedding; this package only scores them."""

    values: np.ndarray  # float64, shape (dim,)

    def __post_init__(self) -> None:
        v = self.values
        if v.ndim != 1 or v.size < 1:
            raise ValueError("embedding must be a non-empty 1-D vector")
        if not np.all(np.isfinite(v)):
            raise ValueError("embedding contains non-finite values")
        if float(np.linalg.norm(v)) == 0.0:
            raise ValueError("embedding has zero norm")
        v.setflags(write=False)

    @classmethod
    def from_json(cls, text: str) -> "EmbeddingVector":
        data = json.loads(text)
        if not isinstance(data, list):
            raise ValueError("embedding file must hold a JSON array of numbers")
        return cls(np.asarray(data, dtype=np.float64))


def _require_same_size(a: RasterImage, b: RasterImage) -> None:
    if a.array.shape != b.array.shape:
        raise DimensionMismatch(
            f"image dimensions differ: {a.width}x{a.height} vs {b.width}x{b.height}"
        )


def pad_pair(a: RasterImage, b: RasterImage, seed: int) -> tuple[RasterImage, RasterImage]:
    """Grow both images to their common bounding size with seeded uniform noise.

    Content stays anchored at the top-left (screenshots share a page origin);
    the right/bottom fill is i.i.d. uniform over [0, 255] per channel from a
    generator seeded by ``seed``. An already equal-sized pair is returned
    unchanged, bit for bit.
    """
    if a.array.shape == b.array.shape:
        return a, b
    width = max(a.width, b.width)
    height = max(a.height, b.height)
    rng = np.random.default_rng(seed)

    def grow(img: RasterImage) -> RasterImage:
        if img.width == width and img.height == height:
            return img
        canvas = rng.integers(0, 256, size=(height, width, 3), dtype=np.uint8)
        canvas[: img.height, : img.width] = img.array
        return RasterImage(canvas)

    return grow(a), grow(b)


def mae(a: RasterImage, b: RasterImage) -> float:
    """Mean absolute pixel-intensity difference over all pixels and channels."""
    _require_same_size(a, b)
    diff = np.abs(a.array.astype(np.float64) - b.array.astype(np.float64))
    return float(diff.mean())


def psnr(a: RasterImage, b: RasterImage) -> float:
    """Peak signal-to-noise ratio in dB; identical images return the 100 dB cap."""
    _require_same_size(a, b)
    diff = a.array.astype(np.float64) - b.array.astype(np.float64)
    mse = float(np.mean(diff * diff))
    if mse == 0.0:
        return PSNR_CAP_DB
    return 10.0 * math.log10(255.0 ** 2 / mse)


_SSIM_WINDOW_SIZE = 11
_SSIM_SIGMA = 1.5
_SSIM_K1 = 0.01
_SSIM_K2 = 0.03
_SSIM_L = 255.0


def _ssim_window() -> np.ndarray:
    half = (_SSIM_WINDOW_SIZE - 1) / 2.0
    coords = np.arange(_SSIM_WINDOW_SIZE) - half
    g = np.exp(-(coords ** 2) / (2.0 * _SSIM_SIGMA ** 2))
    window = np.outer(g, g)
    return window / window.sum()


def ssim(a: RasterImage, b: RasterImage) -> float:
    """Mean local structural similarity over grayscale conversions.

    Gaussian 11x11 window (sigma 1.5), K1=0.01, K2=0.03, L=255; the map is
    computed on fully covered windows only and averaged.
    """
    _require_same_size(a, b)
    if a.width < _SSIM_WINDOW_SIZE or a.height < _SSIM_WINDOW_SIZE:
        raise ValueError(
            f"image {a.width}x{a.height} smaller than the "
            f"{_SSIM_WINDOW_SIZE}x{_SSIM_WINDOW_SIZE} window"
        )
    x = a.grayscale()
    y = b.grayscale()
    window = _ssim_window()

    def smooth(img: np.ndarray) -> np.ndarray:
        return fftconvolve(img, window, mode="valid")

    mu_x = smooth(x)
    mu_y = smooth(y)
    var_x = smooth(x * x) - mu_x * mu_x
    var_y = smooth(y * y) - mu_y * mu_y
    cov = smooth(x * y) - mu_x * mu_y

    c1 = (_SSIM_K1 * _SSIM_L) ** 2
    c2 = (_SSIM_K2 * _SSIM_L) ** 2
    ssim_map = ((2.0 * mu_x * mu_y + c1) * (2.0 * cov + c2)) / (
        (mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2)
    )
    return float(ssim_map.mean())


def nemd(reference: RasterImage, candidate: RasterImage) -> float:
    """Normalized earth mover's distance between intensity distributions.

    EMD is the 1-D Wasserstein-1 distance between the two grayscale intensity
    histograms (unit mass each); it is normalized by the worst-case EMD of the
    *reference* image, in which every pixel travels to its farthest intensity
    (0 or 255). Higher is more similar; the reference side makes it asymmetric.
    """
    _require_same_size(reference, candidate)

    def levels(img: RasterImage) -> np.ndarray:
        return np.clip(np.rint(img.grayscale()), 0, 255).astype(np.int64)

    ref = levels(reference)
    cand = levels(candidate)
    n = ref.size
    hist_ref = np.bincount(ref.ravel(), minlength=256) / n
    hist_cand = np.bincount(cand.ravel(), minlength=256) / n
    emd = float(np.abs(np.cumsum(hist_ref) - np.cumsum(hist_cand))[:255].sum())
    # max(v, 255-v) >= 127.5 for every level, so the bound is never zero
    emd_max = float(np.maximum(ref, 255 - ref).mean())
    return min(1.0, max(0.0, 1.0 - emd / emd_max))


def clip_cosine(e1: EmbeddingVector, e2: EmbeddingVector) -> float:
    """Cosine similarity of two embedding vectors (never padded)."""
    if e1.values.shape != e2.values.shape:
        raise DimensionMismatch(
            f"embedding dimensions differ: {e1.values.size} vs {e2.values.size}"
        )
    n1 = float(np.linalg.norm(e1.values))
    n2 = float(np.linalg.norm(e2.values))
    cos = float(np.dot(e1.values, e2.values) / (n1 * n2))
    return min(1.0, max(-1.0, cos))


def mean_color_lab(
    img: RasterImage, box: BoundingBox
) -> tuple[float, float, float]:
    """Mean RGB over the clamped box region, converted to CIELAB (D65)."""
    clamped = box.clamped(float(img.width), float(img.height))
    x_start = int(math.floor(clamped.x1))
    x_stop = int(math.ceil(clamped.x2))
    y_start = int(math.floor(clamped.y1))
    y_stop = int(math.ceil(clamped.y2))
    if x_stop <= x_start or y_stop <= y_start:
        raise EmptyRegionError(
            f"box [[{box.x1}, {box.y1}], [{box.x2}, {box.y2}]] does not cover any "
            f"pixel of a {img.width}x{img.height} image"
        )
    region = img.array[y_start:y_stop, x_start:x_stop].astype(np.float64)
    mean_rgb: Sequence[float] = region.reshape(-1, 3).mean(axis=0)
    return srgb_to_lab(mean_rgb)
