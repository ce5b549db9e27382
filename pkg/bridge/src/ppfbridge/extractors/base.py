"""Extractor interface and configuration."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol

import numpy as np

EXTRACTOR_NAMES = ("d2net", "superpoint", "r2d2", "keynet", "lfnet", "orb")

# corner-based extractors only accept a single-channel image
COLOR_MODES = {
    "orb": "gray",
    "superpoint": "gray",
    "keynet": "gray",
    "lfnet": "gray",
    "r2d2": "color",
    "d2net": "color",
}

DEFAULT_SCALES = (0.5, 1.0, 2.0)


@dataclass(frozen=True)
class ExtractorConfig:
    extractor_name: str
    multiscale: bool = False
    scales: tuple[float, ...] = DEFAULT_SCALES
    device: str = "cpu"
    weights_dir: str | None = None
    max_features: int = 2000

    def __post_init__(self) -> None:
        if self.extractor_name not in EXTRACTOR_NAMES:
            raise ValueError(f"unknown extractor {self.extractor_name!r}; "
                             f"choose from {EXTRACTOR_NAMES}")
        scales = tuple(float(s) for s in self.scales)
        if self.multiscale and not scales:
            raise ValueError("multiscale extraction needs a nonempty scale list")
        if any(s <= 0 for s in scales):
            raise ValueError("scales must be positive")
        object.__setattr__(self, "scales", scales)

    @property
    def input_color_mode(self) -> str:
        return COLOR_MODES[self.extractor_name]

    def effective_scales(self) -> tuple[float, ...]:
        return self.scales if self.multiscale else (1.0,)


class Extractor(Protocol):
    """One extractor backend: image in, (keypoints, descriptors) out.

    ``extract`` takes a preprocessed uint8 image (gray 2-D or color 3-D)
    and returns (keypoints (N, 3) float32 as x, y, score; descriptors
    (N, D) float32). N may be 0; descriptor dimension must equal
    ``descriptor_dim`` in every call.
    """

    name: str
    descriptor_dim: int

    def extract(self, img: np.ndarray) -> tuple[np.ndarray, np.ndarray]: ...
