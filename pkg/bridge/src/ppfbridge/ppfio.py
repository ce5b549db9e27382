"""Writer side of the descriptor-set (PPF) file contract.

This package only *produces* PPF files and manifests; the numerical
consumer validates and reads them. Layout (little-endian):

    magic   4 bytes  b"RFSP"
    version u16      1
    flags   u16      bit 0: keypoint block present
    D       u32      descriptor dimension
    N       u32      descriptor count
    [keypoints]      N records of 4 x float32 (x, y, scale, score), if flag
    descriptors      N*D float32, row-major
"""

from __future__ import annotations

import json
import os
import struct
import tempfile
from pathlib import Path

import numpy as np

MAGIC = b"RFSP"
VERSION = 1
FLAG_KEYPOINTS = 0x1
_HEADER = struct.Struct("<4sHHII")


# mkstemp creates 0600 files; restore the umask-derived mode before renaming
_UMASK = os.umask(0)
os.umask(_UMASK)


def _atomic_write(path: Path, payload: bytes) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.chmod(tmp, 0o666 & ~_UMASK)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_ppf(path: str | Path, descriptors: np.ndarray,
              keypoints: np.ndarray | None = None) -> None:
    """Write one image's descriptor set.

    descriptors: (N, D) array, cast to float32; D must be positive even
    when N is 0. keypoints, if given: (N, 4) float32 (x, y, scale, score).
    """
    desc = np.ascontiguousarray(descriptors, dtype="<f4")
    if desc.ndim != 2 or desc.shape[1] < 1:
        raise ValueError(f"descriptors must be (N, D>=1), got shape {desc.shape}")
    if not np.all(np.isfinite(desc)):
        raise ValueError("descriptors contain non-finite values")
    n, d = desc.shape
    flags = 0
    blocks = []
    if keypoints is not None:
        kp = np.ascontiguousarray(keypoints, dtype="<f4")
        if kp.shape != (n, 4):
            raise ValueError(f"keypoints must be ({n}, 4), got {kp.shape}")
        if not np.all(np.isfinite(kp)):
            raise ValueError("keypoints contain non-finite values")
        flags |= FLAG_KEYPOINTS
        blocks.append(kp.tobytes())
    blocks.append(desc.tobytes())
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    _atomic_write(path, _HEADER.pack(MAGIC, VERSION, flags, d, n) + b"".join(blocks))


def write_manifest(path: str | Path, category: str, items: list[dict]) -> None:
    """Write a dataset manifest.

    items: dicts with path (relative to the manifest), label (0/1),
    split ("train"/"test") and optional defect_type.
    """
    doc = {"category": category, "items": items}
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    _atomic_write(path, (json.dumps(doc, indent=2, sort_keys=True) + "\n").encode())
