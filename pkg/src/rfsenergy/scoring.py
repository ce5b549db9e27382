"""Set-level anomaly scores over a fitted model.

Three scores are provided, all functions of the squared Mahalanobis
distances of a set's descriptors from the fitted Gaussian:

 * ``energy`` — negative-log-probability style score combining a cardinality
   part (-|X| ln rho + ln |X|!) with the sum of the largest k% squared
   distances. Higher = more anomalous.
 * ``as`` — plain sum of (unsquared, by default) Mahalanobis distances.
   Higher = more anomalous.
 * ``loglik`` — full set log-likelihood under the Poisson set model.
   Higher = more normal; evaluation negates it so all methods rank alike.

Distances are always sorted (descending) before any summation, which makes
every score bitwise invariant to descriptor storage order.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import solve_triangular

from .errors import DegenerateInputWarning, ScoringError, ValidationError
from .estimation import ModelParams
from .ppf import PointPatternSet

METHODS = ("energy", "as", "loglik")

LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class ScoringConfig:
    """Score method selection plus its knobs."""

    method: str = "energy"
    top_k_percent: float = 100.0
    as_squared: bool = False

    def __post_init__(self) -> None:
        if self.method not in METHODS:
            raise ValidationError(f"unknown scoring method {self.method!r}")
        if not (0.0 < self.top_k_percent <= 100.0):
            raise ValidationError(
                f"top_k_percent must be in (0, 100], got {self.top_k_percent}"
            )


def _check_dim(s: PointPatternSet, model: ModelParams) -> None:
    if s.dim != model.dim:
        raise ScoringError(f"set has dim {s.dim}, model expects {model.dim}")


def mahalanobis_sq(x: np.ndarray, model: ModelParams) -> float:
    """Squared Mahalanobis distance of one descriptor from the fitted Gaussian.

    Computed as |z|^2 with L z = (x - mu) solved by forward substitution
    against the model's lower Cholesky factor; no matrix is ever inverted.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (model.dim,):
        raise ScoringError(f"point has shape {x.shape}, model expects ({model.dim},)")
    if not np.all(np.isfinite(x)):
        raise ScoringError("point contains non-finite values")
    z = solve_triangular(model.chol_lower, x - model.mu, lower=True)
    return float(z @ z)


def _sorted_sq_distances(s: PointPatternSet, model: ModelParams) -> np.ndarray:
    """Per-point squared distances, sorted descending (empty for empty sets)."""
    if len(s) == 0:
        return np.empty(0, dtype=np.float64)
    diff = s.descriptors.astype(np.float64) - model.mu
    z = solve_triangular(model.chol_lower, diff.T, lower=True)
    m2 = (z * z).sum(axis=0)
    return np.sort(m2)[::-1]


def _top_k_count(n: int, top_k_percent: float) -> int:
    return min(n, max(1, math.ceil(top_k_percent / 100.0 * n)))


def rfs_energy(
    s: PointPatternSet, model: ModelParams, top_k_percent: float = 100.0
) -> float:
    """Set energy: cardinality terms plus the top-k% largest squared distances.

    The top-k restriction applies to the distance sum only; the cardinality
    terms always use the full set size. An empty set scores 0 and emits a
    degenerate-input warning.
    """
    _check_dim(s, model)
    if not (0.0 < top_k_percent <= 100.0):
        raise ValidationError(f"top_k_percent must be in (0, 100], got {top_k_percent}")
    n = len(s)
    if n == 0:
        warnings.warn(
            f"scoring an empty set ({s.source_id!r}); energy defined as 0",
            DegenerateInputWarning,
            stacklevel=2,
        )
        return 0.0
    if model.rho <= 0.0:
        raise ScoringError("model intensity rho is not positive; refit on non-empty sets")
    m2 = _sorted_sq_distances(s, model)
    kappa = _top_k_count(n, top_k_percent)
    return -n * math.log(model.rho) + math.lgamma(n + 1) + float(m2[:kappa].sum())


def score_as(s: PointPatternSet, model: ModelParams, squared: bool = False) -> float:
    """Sum of Mahalanobis distances (unsquared by default) over the set."""
    _check_dim(s, model)
    if len(s) == 0:
        warnings.warn(
            f"scoring an empty set ({s.source_id!r}); distance sum is 0",
            DegenerateInputWarning,
            stacklevel=2,
        )
        return 0.0
    m2 = _sorted_sq_distances(s, model)
    if squared:
        return float(m2.sum())
    return float(np.sqrt(m2).sum())


def rfs_log_likelihood(s: PointPatternSet, model: ModelParams) -> float:
    """Log-likelihood of the set under the fitted Poisson set model.

    Sum of the Poisson cardinality log-pmf, the ln |X|! set-to-vector volume
    term, and the Gaussian log-density of every descriptor.
    """
    _check_dim(s, model)
    if model.rho <= 0.0:
        raise ScoringError("model intensity rho is not positive; refit on non-empty sets")
    n = len(s)
    card_term = n * math.log(model.rho) - model.rho - math.lgamma(n + 1)
    if n == 0:
        warnings.warn(
            f"scoring an empty set ({s.source_id!r})",
            DegenerateInputWarning,
            stacklevel=2,
        )
        return card_term
    m2 = _sorted_sq_distances(s, model)
    log_norm = -0.5 * model.dim * LOG_2PI - float(np.log(np.diag(model.chol_lower)).sum())
    feature_term = -0.5 * float(m2.sum()) + n * log_norm
    return card_term + math.lgamma(n + 1) + feature_term


def score_set(s: PointPatternSet, model: ModelParams, config: ScoringConfig) -> float:
    """Score one set with the configured method."""
    if config.method == "energy":
        return rfs_energy(s, model, config.top_k_percent)
    if config.method == "as":
        return score_as(s, model, squared=config.as_squared)
    return rfs_log_likelihood(s, model)


def score_batch(
    sets: Sequence[PointPatternSet], model: ModelParams, config: ScoringConfig
) -> list[float]:
    """Score a sequence of sets, preserving order; fails fast with index context."""
    out: list[float] = []
    for i, s in enumerate(sets):
        try:
            out.append(score_set(s, model, config))
        except ScoringError as exc:
            raise ScoringError(f"set {i} ({s.source_id!r}): {exc}") from exc
    return out
