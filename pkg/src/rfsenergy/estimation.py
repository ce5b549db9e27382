"""Fitting the Poisson set model from normal training data.

A fitted model has four ingredients, all with closed forms:

 * ``rho`` — expected set cardinality, the arithmetic mean of training
   cardinalities (the Poisson MLE);
 * ``mu`` — pooled mean of all descriptors of all training sets;
 * ``sigma`` — pooled maximum-likelihood covariance (denominator is the
   total point count, not n-1);
 * ``sigma_shrunk`` — convex combination ``(1-alpha)*sigma + alpha*m*I``
   with the closed-form shrinkage intensity ``alpha`` of the Ledoit-Wolf
   estimator, which keeps the matrix invertible in the few-sample,
   high-dimension regime.

All accumulation is in float64 regardless of input precision, and always
traverses sets in the order given (so refitting the same collection is
deterministic; reordering the collection changes results only at the level
of float rounding).
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DegenerateModelWarning, EstimationError, ModelError, ValidationError
from .ppf import PointPatternSet, atomic_write_text

MODEL_FILE_VERSION = 1

_JITTER_BASE = 1e-6
_JITTER_GROWTH = 10.0
_JITTER_RETRIES = 3
_ALPHA_DENOM_FLOOR = 1e-15


@dataclass(frozen=True)
class ModelParams:
    """Fitted normal model: Poisson intensity plus a Gaussian feature density.

    ``chol_lower`` is the lower Cholesky factor of ``sigma_shrunk``; every
    distance computation goes through triangular solves against it, never
    through an explicit inverse.
    """

    dim: int
    rho: float
    mu: np.ndarray
    sigma_shrunk: np.ndarray
    alpha: float
    chol_lower: np.ndarray
    n_train_sets: int
    n_train_points: int
    # transient fit diagnostic (not serialized): diagonal jitter that had to
    # be added to make the shrunk covariance factorizable
    jitter_applied: float = 0.0

    def validate(self) -> None:
        """Check the structural invariants; raise ModelError on violation."""
        d = self.dim
        if self.mu.shape != (d,) or self.sigma_shrunk.shape != (d, d):
            raise ModelError("parameter shapes inconsistent with dim")
        if not (0.0 <= self.alpha <= 1.0):
            raise ModelError(f"alpha must be in [0, 1], got {self.alpha}")
        if self.n_train_points > 0 and not self.rho > 0.0:
            raise ModelError("rho must be positive when training points exist")
        scale = float(np.abs(self.sigma_shrunk).max())
        asym = float(np.abs(self.sigma_shrunk - self.sigma_shrunk.T).max())
        if scale > 0 and asym > 1e-12 * scale:
            raise ModelError(f"sigma_shrunk asymmetric: {asym / scale:.3e} relative")
        recon = self.chol_lower @ self.chol_lower.T
        denom = float(np.linalg.norm(self.sigma_shrunk))
        err = float(np.linalg.norm(recon - self.sigma_shrunk))
        if denom > 0 and err > 1e-8 * denom:
            raise ModelError(f"Cholesky factor does not reproduce sigma_shrunk: {err / denom:.3e}")
        m = float(np.trace(self.sigma_shrunk)) / d
        min_eig = float(np.linalg.eigvalsh(self.sigma_shrunk)[0])
        if min_eig < self.alpha * m - 1e-9:
            raise ModelError(
                f"minimum eigenvalue {min_eig:.3e} below shrinkage floor {self.alpha * m:.3e}"
            )


def _check_sets(sets: Sequence[PointPatternSet]) -> int:
    if len(sets) == 0:
        raise EstimationError("cannot fit a model from an empty training collection")
    dim = sets[0].dim
    for i, s in enumerate(sets):
        if s.dim != dim:
            raise EstimationError(f"set {i} has dim {s.dim}, expected {dim}")
    return dim


def fit_poisson_intensity(sets: Sequence[PointPatternSet]) -> float:
    """Average cardinality over the training sets (the Poisson MLE).

    The numerator is an exact integer sum, so collections with integer
    mean cardinality produce it exactly.
    """
    if len(sets) == 0:
        raise EstimationError("cannot estimate intensity from an empty collection")
    total = sum(len(s) for s in sets)
    rho = total / len(sets)
    if total == 0:
        warnings.warn(
            "all training sets are empty; intensity is 0 and the model is degenerate",
            DegenerateModelWarning,
            stacklevel=2,
        )
    return rho


def fit_feature_mean(sets: Sequence[PointPatternSet]) -> np.ndarray:
    """Pooled mean over all descriptors of all sets (weights points, not sets)."""
    dim = _check_sets(sets)
    total = np.zeros(dim, dtype=np.float64)
    n = 0
    for s in sets:
        if len(s) == 0:
            continue
        total += s.descriptors.astype(np.float64).sum(axis=0)
        n += len(s)
    if n == 0:
        raise EstimationError("cannot estimate a mean from zero points")
    return total / n


def fit_empirical_covariance(
    sets: Sequence[PointPatternSet], mu: np.ndarray
) -> np.ndarray:
    """Pooled maximum-likelihood covariance around ``mu``.

    Denominator is the total point count (no n-1 correction); the result is
    symmetrized to remove float accumulation skew.
    """
    dim = _check_sets(sets)
    if mu.shape != (dim,):
        raise EstimationError(f"mu has shape {mu.shape}, expected ({dim},)")
    scatter = np.zeros((dim, dim), dtype=np.float64)
    n = 0
    for s in sets:
        if len(s) == 0:
            continue
        centered = s.descriptors.astype(np.float64) - mu
        scatter += centered.T @ centered
        n += len(s)
    if n == 0:
        raise EstimationError("cannot estimate a covariance from zero points")
    sigma = scatter / n
    return (sigma + sigma.T) / 2.0


def ledoit_wolf_shrink(
    sets: Sequence[PointPatternSet], mu: np.ndarray, sigma: np.ndarray
) -> tuple[np.ndarray, float]:
    """Closed-form shrinkage of ``sigma`` toward its scaled-identity target.

    With the trace inner product ``<A, B> = trace(A B^T) / D`` over the n
    centered training points x_k:

        m      = <sigma, I>
        d^2    = <sigma - m I, sigma - m I>
        bbar^2 = (1/n^2) sum_k <x_k x_k^T - sigma, x_k x_k^T - sigma>
        alpha  = min(bbar^2, d^2) / d^2          (1 if d^2 ~ 0)

    and the result is ``(1 - alpha) * sigma + alpha * m * I``. The per-point
    term is evaluated without materializing x_k x_k^T via

        <x x^T - S, x x^T - S> = (|x|^4 - 2 x^T S x + <S, S> D) / D.
    """
    dim = _check_sets(sets)
    d = float(dim)
    m = float(np.trace(sigma)) / d
    delta = sigma - m * np.eye(dim)
    d2 = float((delta * delta).sum()) / d
    tr_s2 = float((sigma * sigma).sum())  # == <S, S> * D for symmetric S

    n = 0
    term_sum = 0.0
    for s in sets:
        if len(s) == 0:
            continue
        centered = s.descriptors.astype(np.float64) - mu
        sq_norms = (centered * centered).sum(axis=1)
        x_s_x = np.einsum("ij,ij->i", centered @ sigma, centered)
        term_sum += float((sq_norms * sq_norms - 2.0 * x_s_x + tr_s2).sum()) / d
        n += len(s)
    if n == 0:
        raise EstimationError("cannot estimate shrinkage from zero points")

    bbar2 = max(term_sum / (n * n), 0.0)
    if d2 < _ALPHA_DENOM_FLOOR:
        alpha = 1.0
    else:
        alpha = min(bbar2, d2) / d2
    shrunk = (1.0 - alpha) * sigma + alpha * m * np.eye(dim)
    return (shrunk + shrunk.T) / 2.0, float(alpha)


def _cholesky_with_jitter(
    shrunk: np.ndarray, m: float
) -> tuple[np.ndarray, np.ndarray, float]:
    """Factorize, adding growing diagonal jitter when the matrix is singular.

    Returns (possibly jittered matrix, lower factor, applied jitter).
    """
    try:
        return shrunk, np.linalg.cholesky(shrunk), 0.0
    except np.linalg.LinAlgError:
        pass
    jitter = _JITTER_BASE * max(m, 1e-12)
    dim = shrunk.shape[0]
    for _ in range(_JITTER_RETRIES):
        candidate = shrunk + jitter * np.eye(dim)
        try:
            return candidate, np.linalg.cholesky(candidate), jitter
        except np.linalg.LinAlgError:
            jitter *= _JITTER_GROWTH
    eigs = np.linalg.eigvalsh(shrunk)
    raise ModelError(
        "covariance factorization failed after jitter retries "
        f"(eigenvalue range [{eigs[0]:.3e}, {eigs[-1]:.3e}], last jitter {jitter:.3e})"
    )


def fit_model(sets: Sequence[PointPatternSet]) -> ModelParams:
    """Fit all model parameters from a collection of normal training sets."""
    dim = _check_sets(sets)
    rho = fit_poisson_intensity(sets)
    mu = fit_feature_mean(sets)
    sigma = fit_empirical_covariance(sets, mu)
    shrunk, alpha = ledoit_wolf_shrink(sets, mu, sigma)

    m = float(np.trace(sigma)) / dim
    final_sigma, chol, jitter = _cholesky_with_jitter(shrunk, m)
    if jitter > 0.0:
        warnings.warn(
            f"shrunk covariance was singular; added {jitter:.3e} diagonal jitter",
            DegenerateModelWarning,
            stacklevel=2,
        )
    model = ModelParams(
        dim=dim,
        rho=float(rho),
        mu=mu,
        sigma_shrunk=final_sigma,
        alpha=alpha,
        chol_lower=chol,
        n_train_sets=len(sets),
        n_train_points=sum(len(s) for s in sets),
        jitter_applied=jitter,
    )
    model.validate()
    return model


def save_model(model: ModelParams, path: str | Path) -> None:
    """Serialize a model as JSON; float repr round-trips all 64-bit values."""
    doc = {
        "version": MODEL_FILE_VERSION,
        "dim": model.dim,
        "rho": model.rho,
        "alpha": model.alpha,
        "n_train_sets": model.n_train_sets,
        "n_train_points": model.n_train_points,
        "mu": [float(v) for v in model.mu],
        "sigma_shrunk": [float(v) for v in model.sigma_shrunk.reshape(-1)],
    }
    atomic_write_text(path, json.dumps(doc, indent=2) + "\n")


def load_model(path: str | Path) -> ModelParams:
    """Load a model file, recomputing and revalidating the Cholesky factor."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: not valid JSON: {exc}") from exc
    if doc.get("version") != MODEL_FILE_VERSION:
        raise ValidationError(f"{path}: unsupported model file version {doc.get('version')!r}")
    try:
        dim = int(doc["dim"])
        mu = np.asarray(doc["mu"], dtype=np.float64)
        sigma = np.asarray(doc["sigma_shrunk"], dtype=np.float64).reshape(dim, dim)
        model = ModelParams(
            dim=dim,
            rho=float(doc["rho"]),
            mu=mu,
            sigma_shrunk=sigma,
            alpha=float(doc["alpha"]),
            chol_lower=np.linalg.cholesky(sigma),
            n_train_sets=int(doc["n_train_sets"]),
            n_train_points=int(doc["n_train_points"]),
        )
    except KeyError as exc:
        raise ValidationError(f"{path}: model file missing field {exc}") from exc
    except np.linalg.LinAlgError as exc:
        raise ModelError(f"{path}: stored covariance is not positive definite") from exc
    model.validate()
    return model


def poisson_log_pmf(n: int, rho: float) -> float:
    """log P(N = n) for N ~ Poisson(rho)."""
    if rho <= 0.0:
        raise EstimationError("Poisson intensity must be positive")
    return n * math.log(rho) - rho - math.lgamma(n + 1)
