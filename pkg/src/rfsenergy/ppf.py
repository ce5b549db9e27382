"""Binary descriptor-set files (PPF) and JSON dataset manifests.

A PPF file stores one image's unordered set of D-dimensional descriptors,
optionally with per-descriptor keypoint metadata. Layout (little-endian):

    magic   4 bytes  b"RFSP"
    version u16      1
    flags   u16      bit 0: keypoint block present
    D       u32      descriptor dimension (> 0)
    N       u32      number of descriptors (>= 0)
    [keypoints]      N records of 4 x float32 (x, y, scale, score), if flag
    descriptors      N*D float32, row-major

Descriptors are stored as 32-bit floats (the precision extractors emit);
all numerical accumulation downstream happens in 64-bit.
"""

from __future__ import annotations

import json
import os
import struct
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import DataError, FormatError, TruncationError, ValidationError

MAGIC = b"RFSP"
VERSION = 1
FLAG_KEYPOINTS = 0x1

_HEADER = struct.Struct("<4sHHII")
HEADER_SIZE = _HEADER.size  # 16 bytes
KEYPOINT_RECORD_SIZE = 16  # 4 x float32


def _as_float32_matrix(values, n_cols: int | None, what: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float32)
    if arr.ndim == 1 and arr.size == 0:
        arr = arr.reshape(0, n_cols if n_cols else 0)
    if arr.ndim != 2:
        raise ValidationError(f"{what} must be a 2-D array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DataError(f"{what} contains non-finite values")
    return arr


@dataclass(frozen=True)
class PointPatternSet:
    """One image's unordered set of descriptors (with optional keypoints).

    The descriptor rows have no meaningful order: every operation in this
    package is required to produce results independent of row order.
    Duplicate rows are legal and preserved.
    """

    descriptors: np.ndarray
    keypoints: np.ndarray | None = None
    source_id: str = ""

    def __post_init__(self) -> None:
        desc = _as_float32_matrix(self.descriptors, None, "descriptors")
        if desc.shape[1] < 1:
            raise ValidationError("descriptor dimension must be positive")
        object.__setattr__(self, "descriptors", desc)
        if self.keypoints is not None:
            kp = _as_float32_matrix(self.keypoints, 4, "keypoints")
            if kp.shape[1] != 4:
                raise ValidationError(
                    f"keypoints must have 4 columns (x, y, scale, score), got {kp.shape[1]}"
                )
            if kp.shape[0] != desc.shape[0]:
                raise ValidationError(
                    f"keypoint count {kp.shape[0]} != descriptor count {desc.shape[0]}"
                )
            object.__setattr__(self, "keypoints", kp)

    @property
    def dim(self) -> int:
        return int(self.descriptors.shape[1])

    @property
    def cardinality(self) -> int:
        return int(self.descriptors.shape[0])

    def __len__(self) -> int:
        return self.cardinality


@dataclass(frozen=True)
class ManifestItem:
    path: str
    label: int
    split: str
    defect_type: str | None = None

    def __post_init__(self) -> None:
        if self.label not in (0, 1):
            raise ValidationError(f"label must be 0 or 1, got {self.label!r}")
        if self.split not in ("train", "test"):
            raise ValidationError(f"split must be 'train' or 'test', got {self.split!r}")
        if self.split == "train" and self.label != 0:
            raise ValidationError(
                f"train item {self.path!r} has label {self.label}; training data "
                "must contain normal samples only"
            )


@dataclass(frozen=True)
class Manifest:
    category: str
    items: tuple[ManifestItem, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        object.__setattr__(self, "items", tuple(self.items))
        seen: set[str] = set()
        for item in self.items:
            if item.path in seen:
                raise ValidationError(f"duplicate manifest path {item.path!r}")
            seen.add(item.path)

    def train_items(self) -> tuple[ManifestItem, ...]:
        return tuple(i for i in self.items if i.split == "train")

    def test_items(self) -> tuple[ManifestItem, ...]:
        return tuple(i for i in self.items if i.split == "test")


# captured once at import: mkstemp creates 0600 files, which os.replace
# would otherwise propagate to the final output
_UMASK = os.umask(0)
os.umask(_UMASK)


def atomic_write_bytes(path: str | Path, payload: bytes) -> None:
    """Write a file atomically (temp file in the same directory + rename)."""
    path = Path(path)
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


def atomic_write_text(path: str | Path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def write_ppf(pattern: PointPatternSet, path: str | Path) -> None:
    """Serialize a set to the binary layout above. Write is atomic."""
    flags = FLAG_KEYPOINTS if pattern.keypoints is not None else 0
    n, d = pattern.descriptors.shape
    parts = [_HEADER.pack(MAGIC, VERSION, flags, d, n)]
    if pattern.keypoints is not None:
        parts.append(np.ascontiguousarray(pattern.keypoints, dtype="<f4").tobytes())
    parts.append(np.ascontiguousarray(pattern.descriptors, dtype="<f4").tobytes())
    try:
        atomic_write_bytes(path, b"".join(parts))
    except OSError as exc:
        raise OSError(f"failed to write descriptor-set file {path}: {exc}") from exc


def read_ppf(path: str | Path) -> PointPatternSet:
    """Read a PPF file, validating layout and payload finiteness."""
    path = Path(path)
    blob = path.read_bytes()
    if len(blob) < HEADER_SIZE:
        raise TruncationError(f"{path}: file shorter than the {HEADER_SIZE}-byte header")
    magic, version, flags, d, n = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise FormatError(f"{path}: unsupported version {version}")
    if flags & ~FLAG_KEYPOINTS:
        raise FormatError(f"{path}: unknown flag bits 0x{flags:04x}")
    if d < 1:
        raise FormatError(f"{path}: descriptor dimension must be positive, got {d}")

    has_kp = bool(flags & FLAG_KEYPOINTS)
    expected = HEADER_SIZE + (KEYPOINT_RECORD_SIZE * n if has_kp else 0) + 4 * n * d
    if len(blob) < expected:
        raise TruncationError(
            f"{path}: declared N={n}, D={d} needs {expected} bytes, file has {len(blob)}"
        )
    if len(blob) > expected:
        raise FormatError(f"{path}: {len(blob) - expected} trailing bytes after payload")

    offset = HEADER_SIZE
    keypoints = None
    if has_kp:
        keypoints = np.frombuffer(blob, dtype="<f4", count=4 * n, offset=offset)
        keypoints = keypoints.reshape(n, 4).copy()
        offset += KEYPOINT_RECORD_SIZE * n
    descriptors = np.frombuffer(blob, dtype="<f4", count=n * d, offset=offset)
    descriptors = descriptors.reshape(n, d).copy()

    if not np.all(np.isfinite(descriptors)) or (
        keypoints is not None and not np.all(np.isfinite(keypoints))
    ):
        raise DataError(f"{path}: payload contains non-finite values")
    return PointPatternSet(descriptors=descriptors, keypoints=keypoints, source_id=str(path))


def _item_from_json(obj: dict, base: Path) -> ManifestItem:
    try:
        raw_path = obj["path"]
        label = int(obj["label"])
        split = obj["split"]
    except KeyError as exc:
        raise ValidationError(f"manifest item missing field {exc}") from exc
    p = Path(raw_path)
    if not p.is_absolute():
        p = base / p
    return ManifestItem(
        path=str(p), label=label, split=split, defect_type=obj.get("defect_type")
    )


def read_manifest(path: str | Path) -> Manifest:
    """Load a manifest, resolving relative item paths against its location."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or "items" not in doc:
        raise ValidationError(f"{path}: manifest must be an object with an 'items' list")
    items = tuple(_item_from_json(obj, path.parent) for obj in doc["items"])
    return Manifest(category=str(doc.get("category", "")), items=items)


def write_manifest(manifest: Manifest, path: str | Path) -> None:
    """Write a manifest as deterministic JSON (sorted keys, stable layout)."""
    items = []
    for item in manifest.items:
        obj: dict = {"path": item.path, "label": item.label, "split": item.split}
        if item.defect_type is not None:
            obj["defect_type"] = item.defect_type
        items.append(obj)
    doc = {"category": manifest.category, "items": items}
    atomic_write_text(path, json.dumps(doc, indent=2, sort_keys=True) + "\n")


def load_sets(items: Iterable[ManifestItem]) -> list[PointPatternSet]:
    """Read the descriptor-set file of every item, in item order."""
    return [read_ppf(item.path) for item in items]


def labels_of(items: Sequence[ManifestItem]) -> list[int]:
    return [item.label for item in items]
