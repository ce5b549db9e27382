from __future__ import annotations

import numpy as np
import pytest

from rfsenergy import PointPatternSet


def random_spd(rng: np.random.Generator, dim: int,
               eig_low: float = 0.5, eig_high: float = 2.0) -> np.ndarray:
    """Random SPD matrix with eigenvalues uniform in [eig_low, eig_high]."""
    q, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
    eigs = rng.uniform(eig_low, eig_high, size=dim)
    m = (q * eigs) @ q.T
    return (m + m.T) / 2.0


def random_set(rng: np.random.Generator, n: int, dim: int,
               mu: np.ndarray | None = None,
               chol: np.ndarray | None = None,
               with_keypoints: bool = False) -> PointPatternSet:
    points = rng.standard_normal((n, dim))
    if chol is not None:
        points = points @ chol.T
    if mu is not None:
        points = points + mu
    kp = None
    if with_keypoints:
        kp = np.column_stack([
            rng.uniform(0, 224, size=n),
            rng.uniform(0, 224, size=n),
            rng.uniform(0.5, 2.0, size=n),
            rng.uniform(0, 1, size=n),
        ]).astype(np.float32)
    return PointPatternSet(descriptors=points.astype(np.float32), keypoints=kp)


def random_corpus(rng: np.random.Generator, n_sets: int, rho: float, dim: int,
                  mu: np.ndarray | None = None,
                  chol: np.ndarray | None = None) -> list[PointPatternSet]:
    return [
        random_set(rng, int(rng.poisson(rho)), dim, mu=mu, chol=chol)
        for _ in range(n_sets)
    ]


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240817)
