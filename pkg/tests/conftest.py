from __future__ import annotations

import shutil
from pathlib import Path

import numpy as np
import pytest

from mrweb.raster import RasterImage

FIXTURES = Path(__file__).parent / "fixtures"
PAGE_IDS = ("alpha", "beta", "gamma")


def solid(width: int, height: int, rgb: tuple[int, int, int]) -> RasterImage:
    canvas = np.zeros((height, width, 3), dtype=np.uint8)
    canvas[:, :] = rgb
    return RasterImage(canvas)


def random_image(width: int, height: int, seed: int) -> RasterImage:
    rng = np.random.default_rng(seed)
    return RasterImage(rng.integers(0, 256, size=(height, width, 3), dtype=np.uint8))


def noisy_copy(image: RasterImage, sigma: float, seed: int) -> RasterImage:
    rng = np.random.default_rng(seed)
    noise = rng.normal(0.0, sigma, size=image.array.shape)
    perturbed = np.clip(image.array.astype(np.float64) + noise, 0, 255)
    return RasterImage(perturbed.astype(np.uint8))


@pytest.fixture(scope="session")
def fixture_pages() -> Path:
    return FIXTURES / "pages"


@pytest.fixture()
def workspace_root(tmp_path: Path) -> Path:
    """A workspace seeded with the three fixture pages."""
    root = tmp_path / "ws"
    for page in PAGE_IDS:
        shutil.copytree(FIXTURES / "pages" / page, root / "pages" / page)
    return root
