"""Image -> descriptor-set extraction pipeline.

One image yields one PPF file: the extractor runs on the preprocessed
image at every configured scale and all detections are pooled into a
single set. Keypoint coordinates are mapped back to the 224x224 reference
frame; each record stores the pyramid scale it was detected at.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .extractors import Extractor, ExtractorConfig, make_extractor
from .manifest import scan_category
from .ppfio import write_manifest, write_ppf
from .preprocess import load_image, preprocess, rescale

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ExtractionSummary:
    n_points: int
    dim: int
    per_scale_counts: tuple[int, ...]


def extract_image(img: np.ndarray, extractor: Extractor,
                  scales: tuple[float, ...]) -> tuple[np.ndarray, np.ndarray, tuple[int, ...]]:
    """Run the extractor at every scale and pool all detections.

    Returns (keypoints (N, 4): x, y, scale, score in the preprocessed
    frame; descriptors (N, D); per-scale counts).
    """
    kp_blocks: list[np.ndarray] = []
    desc_blocks: list[np.ndarray] = []
    counts: list[int] = []
    for scale in scales:
        kps, desc = extractor.extract(rescale(img, scale))
        counts.append(len(desc))
        if len(desc) == 0:
            continue
        records = np.column_stack([
            kps[:, 0] / scale,
            kps[:, 1] / scale,
            np.full(len(kps), scale, dtype=np.float32),
            kps[:, 2],
        ]).astype(np.float32)
        kp_blocks.append(records)
        desc_blocks.append(desc.astype(np.float32))
    if desc_blocks:
        keypoints = np.vstack(kp_blocks)
        descriptors = np.vstack(desc_blocks)
    else:
        keypoints = np.empty((0, 4), dtype=np.float32)
        descriptors = np.empty((0, extractor.descriptor_dim), dtype=np.float32)
    return keypoints, descriptors, tuple(counts)


def extract_to_ppf(image_path: str | Path, cfg: ExtractorConfig,
                   out_path: str | Path,
                   extractor: Extractor | None = None) -> ExtractionSummary | None:
    """Extract one image into one PPF file.

    Returns None when the image cannot be decoded (logged and skipped).
    Zero detections still produce a valid N=0 file, with a warning.
    """
    if extractor is None:
        extractor = make_extractor(cfg)
    img = load_image(image_path, cfg.input_color_mode)
    if img is None:
        return None
    prepped = preprocess(img)
    keypoints, descriptors, counts = extract_image(prepped, extractor,
                                                   cfg.effective_scales())
    if len(descriptors) == 0:
        logger.warning("no detections in %s; writing an empty set", image_path)
    write_ppf(out_path, descriptors, keypoints)
    return ExtractionSummary(
        n_points=len(descriptors), dim=descriptors.shape[1], per_scale_counts=counts
    )


def extract_category(dataset_root: str | Path, category: str, cfg: ExtractorConfig,
                     out_dir: str | Path, workers: int = 1) -> Path:
    """Convert one MVTec-layout category into PPF files plus a manifest.

    The output mirrors the category's directory structure with .ppf files;
    the manifest lands at <out_dir>/manifest.json. Returns the manifest path.
    """
    records = scan_category(dataset_root, category)
    out = Path(out_dir)
    extractor = make_extractor(cfg)

    def one(record: dict):
        rel = record["rel"].with_suffix(".ppf")
        summary = extract_to_ppf(record["image_path"], cfg, out / rel, extractor)
        if summary is None:
            return None
        return {
            "path": str(rel),
            "label": record["label"],
            "split": record["split"],
            **({"defect_type": record["defect_type"]}
               if record["defect_type"] is not None else {}),
        }

    if workers <= 1:
        items = [one(r) for r in records]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            items = list(pool.map(one, records))
    kept = [i for i in items if i is not None]
    manifest_path = out / "manifest.json"
    write_manifest(manifest_path, category, kept)
    logger.info("extracted %d/%d images of %s -> %s",
                len(kept), len(records), category, out)
    return manifest_path
