"""ORB wrapper (OpenCV); the only extractor with no pretrained weights.

The 32-byte binary descriptors are unpacked to 256 float entries in
{0, 1}, one per bit, so downstream sees a fixed 256-D real vector.
"""

from __future__ import annotations

import numpy as np

import cv2


class OrbExtractor:
    name = "orb"
    descriptor_dim = 256

    def __init__(self, max_features: int = 2000) -> None:
        self._orb = cv2.ORB_create(nfeatures=max_features)

    def extract(self, img: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        if img.ndim != 2:
            raise ValueError("ORB expects a grayscale image")
        kps, desc = self._orb.detectAndCompute(img, None)
        if desc is None or len(kps) == 0:
            return (np.empty((0, 3), dtype=np.float32),
                    np.empty((0, self.descriptor_dim), dtype=np.float32))
        keypoints = np.array(
            [[kp.pt[0], kp.pt[1], kp.response] for kp in kps], dtype=np.float32
        )
        bits = np.unpackbits(desc.astype(np.uint8), axis=1)
        return keypoints, bits.astype(np.float32)
