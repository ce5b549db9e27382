from __future__ import annotations

import numpy as np
import pytest

import cv2


def noise_image(rng: np.random.Generator, h: int = 300, w: int = 200,
                color: bool = False) -> np.ndarray:
    shape = (h, w, 3) if color else (h, w)
    return rng.integers(0, 256, size=shape, dtype=np.uint8).astype(np.uint8)


def defect_image(rng: np.random.Generator, h: int = 300, w: int = 200) -> np.ndarray:
    img = noise_image(rng, h, w)
    img[h // 3 : h // 2, w // 3 : w // 2] = 255
    return img


@pytest.fixture
def mvtec_root(tmp_path):
    """Tiny MVTec-layout dataset of seeded noise images (category 'widget')."""
    rng = np.random.default_rng(515)
    root = tmp_path / "dataset"
    cat = root / "widget"
    for sub, count, maker in (
        ("train/good", 6, noise_image),
        ("test/good", 3, noise_image),
        ("test/scratch", 3, defect_image),
    ):
        d = cat / sub
        d.mkdir(parents=True)
        for i in range(count):
            assert cv2.imwrite(str(d / f"{i:03d}.png"), maker(rng))
    return root
