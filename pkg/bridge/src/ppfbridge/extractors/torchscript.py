"""Generic wrapper around pretrained networks exported as TorchScript.

Deep extractors (d2net, superpoint, r2d2, keynet, lfnet) are wrapped, not
reimplemented: each is expected as a TorchScript archive
``<weights_dir>/<name>.pt`` obtained via ``ppfbridge fetch-weights``.

Module convention: called with a float32 tensor of shape (1, C, H, W)
scaled to [0, 1] (C = 1 for grayscale extractors, 3 for color), it
returns ``(keypoints, scores, descriptors)``:

    keypoints   (N, 2+) float — x, y in input-pixel coordinates
    scores      (N,)    float — detection scores
    descriptors (N, D)  float

The descriptor dimension is probed once at load with a small dummy input.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np


class TorchScriptExtractor:
    def __init__(self, name: str, weights_path: str | Path, color_mode: str,
                 device: str = "cpu") -> None:
        import torch

        self._torch = torch
        self.name = name
        self._color_mode = color_mode
        self._device = torch.device(device)
        weights_path = Path(weights_path)
        if not weights_path.is_file():
            raise FileNotFoundError(
                f"no TorchScript weights for {name!r} at {weights_path}; run "
                f"`ppfbridge fetch-weights --extractor {name}` first"
            )
        self._module = torch.jit.load(str(weights_path), map_location=self._device)
        self._module.eval()
        self.descriptor_dim = self._probe_dim()

    def _to_tensor(self, img: np.ndarray):
        arr = img.astype(np.float32) / 255.0
        if arr.ndim == 2:
            arr = arr[None, :, :]
        else:
            arr = arr.transpose(2, 0, 1)
        return self._torch.from_numpy(arr[None]).to(self._device)

    def _probe_dim(self) -> int:
        channels = 1 if self._color_mode == "gray" else 3
        dummy = np.zeros((64, 64) if channels == 1 else (64, 64, 3), dtype=np.uint8)
        with self._torch.no_grad():
            out = self._module(self._to_tensor(dummy))
        if not (isinstance(out, (tuple, list)) and len(out) == 3):
            raise ValueError(
                f"{self.name}: TorchScript module must return "
                "(keypoints, scores, descriptors)"
            )
        return int(out[2].shape[-1])

    def extract(self, img: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        with self._torch.no_grad():
            kps, scores, desc = self._module(self._to_tensor(img))
        kps = kps.cpu().numpy().astype(np.float32)
        scores = scores.cpu().numpy().astype(np.float32).reshape(-1)
        desc = desc.cpu().numpy().astype(np.float32)
        if desc.shape[1] != self.descriptor_dim:
            raise ValueError(
                f"{self.name}: descriptor dim changed between calls "
                f"({desc.shape[1]} != {self.descriptor_dim})"
            )
        keypoints = np.column_stack([kps[:, 0], kps[:, 1], scores]).astype(np.float32)
        return keypoints, desc
