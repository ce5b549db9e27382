"""Image loading and the fixed preprocessing pipeline.

Every image goes through the same two steps regardless of its original
size: resize to 256x256, then center-crop to 224x224. A 224x224 input is
therefore resized up and cropped back, not passed through.
"""

from __future__ import annotations

import logging
from pathlib import Path

import cv2
import numpy as np

logger = logging.getLogger(__name__)

RESIZE_TO = 256
CROP_TO = 224


def load_image(path: str | Path, color_mode: str) -> np.ndarray | None:
    """Decode an image as uint8 gray (H, W) or color (H, W, 3) BGR.

    Returns None (with a logged path) when the file cannot be decoded.
    """
    flag = cv2.IMREAD_GRAYSCALE if color_mode == "gray" else cv2.IMREAD_COLOR
    img = cv2.imread(str(path), flag)
    if img is None:
        logger.warning("skipping undecodable image: %s", path)
        return None
    return img


def preprocess(img: np.ndarray) -> np.ndarray:
    """Resize to 256x256 then center-crop to 224x224."""
    resized = cv2.resize(img, (RESIZE_TO, RESIZE_TO), interpolation=cv2.INTER_AREA)
    off = (RESIZE_TO - CROP_TO) // 2
    return resized[off : off + CROP_TO, off : off + CROP_TO]


def rescale(img: np.ndarray, scale: float) -> np.ndarray:
    """Scale an image by a pyramid factor (>= 1 pixel per side)."""
    if scale == 1.0:
        return img
    h = max(1, round(img.shape[0] * scale))
    w = max(1, round(img.shape[1] * scale))
    interp = cv2.INTER_AREA if scale < 1.0 else cv2.INTER_LINEAR
    return cv2.resize(img, (w, h), interpolation=interp)
