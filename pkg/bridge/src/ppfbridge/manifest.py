"""Manifest construction for datasets in the MVTec directory layout:

    <root>/<category>/train/good/*         normal training images
    <root>/<category>/test/good/*          normal test images
    <root>/<category>/test/<defect>/*      anomalous test images
"""

from __future__ import annotations

from pathlib import Path

IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg", ".bmp", ".tif", ".tiff"}


class LayoutError(Exception):
    pass


def _images_in(directory: Path) -> list[Path]:
    return sorted(
        p for p in directory.iterdir()
        if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES
    )


def scan_category(dataset_root: str | Path, category: str) -> list[dict]:
    """Enumerate a category's images as manifest-style records.

    Each record: image_path (absolute Path), rel (path relative to the
    category dir), label, split, defect_type.
    """
    root = Path(dataset_root) / category
    train_good = root / "train" / "good"
    if not train_good.is_dir():
        raise LayoutError(f"missing {train_good}; expected MVTec layout under {root}")

    records: list[dict] = []
    for img in _images_in(train_good):
        records.append({
            "image_path": img,
            "rel": img.relative_to(root),
            "label": 0,
            "split": "train",
            "defect_type": None,
        })

    test_dir = root / "test"
    if test_dir.is_dir():
        for defect_dir in sorted(p for p in test_dir.iterdir() if p.is_dir()):
            defect = defect_dir.name
            label = 0 if defect == "good" else 1
            for img in _images_in(defect_dir):
                records.append({
                    "image_path": img,
                    "rel": img.relative_to(root),
                    "label": label,
                    "split": "test",
                    "defect_type": None if defect == "good" else defect,
                })
    return records
