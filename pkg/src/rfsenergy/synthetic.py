"""Seeded generator of Poisson-Gaussian descriptor-set corpora.

The generator is the ground-truth oracle for the whole pipeline: normal
sets draw their cardinality from Poisson(rho0) and their descriptors from
N(mu0, sigma0); anomalous sets optionally translate a fraction of their
points by a fixed vector whose Mahalanobis length is ``anomaly_shift_delta``
and/or inflate their cardinality by ``cardinality_factor``.

Each generated item uses an independent generator keyed by
(seed, role, index), so regenerating a dataset is byte-for-byte
reproducible regardless of generation order.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

import numpy as np

from .errors import ValidationError
from .ppf import Manifest, ManifestItem, PointPatternSet, write_manifest, write_ppf

_ROLE_TRAIN = 0
_ROLE_TEST_NORMAL = 1
_ROLE_TEST_ANOMALOUS = 2


@dataclass(frozen=True)
class SyntheticConfig:
    dim: int
    rho0: float
    mu0: np.ndarray
    sigma0: np.ndarray
    anomaly_shift_delta: float = 0.0
    anomaly_fraction: float = 0.0
    cardinality_factor: float = 1.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ValidationError("dim must be positive")
        if not self.rho0 > 0.0:
            raise ValidationError("rho0 must be positive")
        if not (0.0 <= self.anomaly_fraction <= 1.0):
            raise ValidationError("anomaly_fraction must be in [0, 1]")
        if not self.cardinality_factor > 0.0:
            raise ValidationError("cardinality_factor must be positive")
        if self.seed < 0:
            raise ValidationError("seed must be nonnegative")
        mu0 = np.asarray(self.mu0, dtype=np.float64)
        if mu0.shape != (self.dim,):
            raise ValidationError(f"mu0 must have shape ({self.dim},), got {mu0.shape}")
        sigma0 = np.asarray(self.sigma0, dtype=np.float64)
        if sigma0.shape != (self.dim, self.dim):
            raise ValidationError(
                f"sigma0 must have shape ({self.dim}, {self.dim}), got {sigma0.shape}"
            )
        if not np.allclose(sigma0, sigma0.T, rtol=1e-10, atol=0.0):
            raise ValidationError("sigma0 must be symmetric")
        try:
            chol = np.linalg.cholesky(sigma0)
        except np.linalg.LinAlgError as exc:
            raise ValidationError("sigma0 must be positive definite") from exc
        object.__setattr__(self, "mu0", mu0)
        object.__setattr__(self, "sigma0", sigma0)
        object.__setattr__(self, "_chol0", chol)
        eigvecs = np.linalg.eigh(sigma0)[1]
        u = eigvecs[:, -1]
        pivot = int(np.argmax(np.abs(u)))
        if u[pivot] < 0:
            u = -u
        object.__setattr__(self, "_shift_vec", self.anomaly_shift_delta * (chol @ u))

    @property
    def chol0(self) -> np.ndarray:
        return self._chol0  # type: ignore[attr-defined]

    def shift_vector(self) -> np.ndarray:
        """Translation applied to shifted points: delta Mahalanobis units
        along the leading eigenvector of sigma0 (fixed, sign-normalized)."""
        return self._shift_vec  # type: ignore[attr-defined]

    @classmethod
    def from_json(cls, doc: Mapping | str | Path) -> "SyntheticConfig":
        """Build a config from a JSON document (path or parsed mapping).

        ``mu0`` defaults to zeros and ``sigma0`` to the identity; ``sigma0``
        may be given nested or as a flat row-major list of D*D values.
        """
        if not isinstance(doc, Mapping):
            path = Path(doc)
            try:
                doc = json.loads(path.read_text(encoding="utf-8"))
            except json.JSONDecodeError as exc:
                raise ValidationError(f"{path}: not valid JSON: {exc}") from exc
        if "dim" not in doc or "rho0" not in doc:
            raise ValidationError("synthetic config needs at least 'dim' and 'rho0'")
        dim = int(doc["dim"])
        mu0 = np.asarray(doc.get("mu0", np.zeros(dim)), dtype=np.float64)
        sigma0 = np.asarray(doc.get("sigma0", np.eye(dim)), dtype=np.float64)
        if sigma0.ndim == 1:
            if sigma0.size != dim * dim:
                raise ValidationError(
                    f"flat sigma0 must have {dim * dim} entries, got {sigma0.size}"
                )
            sigma0 = sigma0.reshape(dim, dim)
        if "seed" not in doc:
            raise ValidationError("synthetic config must pin an explicit 'seed'")
        return cls(
            dim=dim,
            rho0=float(doc["rho0"]),
            mu0=mu0,
            sigma0=sigma0,
            anomaly_shift_delta=float(doc.get("anomaly_shift_delta", 0.0)),
            anomaly_fraction=float(doc.get("anomaly_fraction", 0.0)),
            cardinality_factor=float(doc.get("cardinality_factor", 1.0)),
            seed=int(doc["seed"]),
        )


def item_stream(cfg: SyntheticConfig, role: int, index: int) -> np.random.Generator:
    """Independent generator for one dataset item."""
    return np.random.default_rng([cfg.seed, role, index])


def _gaussian_points(cfg: SyntheticConfig, n: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal((n, cfg.dim))
    return cfg.mu0 + z @ cfg.chol0.T


def sample_normal_set(cfg: SyntheticConfig, rng: np.random.Generator) -> PointPatternSet:
    """Draw |X| ~ Poisson(rho0) descriptors i.i.d. from N(mu0, sigma0)."""
    n = int(rng.poisson(cfg.rho0))
    return PointPatternSet(descriptors=_gaussian_points(cfg, n, rng).astype(np.float32))


def sample_anomalous_set(cfg: SyntheticConfig, rng: np.random.Generator) -> PointPatternSet:
    """As normal, but with an inflated cardinality and/or a shifted subset.

    Cardinality is Poisson(cardinality_factor * rho0); afterwards the first
    ceil(anomaly_fraction * |X|) points are translated by the fixed shift
    vector (which set positions carry the shift is immaterial downstream,
    since every score is order-invariant).
    """
    n = int(rng.poisson(cfg.cardinality_factor * cfg.rho0))
    points = _gaussian_points(cfg, n, rng)
    n_shift = math.ceil(cfg.anomaly_fraction * n)
    if n_shift > 0:
        points[:n_shift] += cfg.shift_vector()
    return PointPatternSet(descriptors=points.astype(np.float32))


def generate_dataset(
    cfg: SyntheticConfig,
    n_train: int,
    n_test_normal: int,
    n_test_anomalous: int,
    out_dir: str | Path,
    category: str = "synthetic",
) -> Manifest:
    """Write a full corpus (PPF files + manifest) under ``out_dir``.

    Returns the manifest with paths resolved to the output directory.
    Regenerating with an identical config reproduces every byte.
    """
    if min(n_train, n_test_normal, n_test_anomalous) < 0:
        raise ValidationError("dataset item counts must be nonnegative")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    rel_items: list[ManifestItem] = []
    resolved: list[ManifestItem] = []

    def emit(name: str, pattern: PointPatternSet, label: int, split: str,
             defect_type: str | None) -> None:
        write_ppf(pattern, out / name)
        rel_items.append(ManifestItem(path=name, label=label, split=split,
                                      defect_type=defect_type))
        resolved.append(ManifestItem(path=str(out / name), label=label, split=split,
                                     defect_type=defect_type))

    for i in range(n_train):
        s = sample_normal_set(cfg, item_stream(cfg, _ROLE_TRAIN, i))
        emit(f"train_{i:04d}.ppf", s, 0, "train", None)
    for i in range(n_test_normal):
        s = sample_normal_set(cfg, item_stream(cfg, _ROLE_TEST_NORMAL, i))
        emit(f"test_normal_{i:04d}.ppf", s, 0, "test", None)
    for i in range(n_test_anomalous):
        s = sample_anomalous_set(cfg, item_stream(cfg, _ROLE_TEST_ANOMALOUS, i))
        emit(f"test_anomalous_{i:04d}.ppf", s, 1, "test", "shift")

    if n_train == 0:
        warnings.warn(
            "generated dataset has no training items and cannot be used for fitting",
            UserWarning,
            stacklevel=2,
        )
    write_manifest(Manifest(category=category, items=tuple(rel_items)), out / "manifest.json")
    return Manifest(category=category, items=tuple(resolved))
