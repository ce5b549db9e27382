"""AUC/ROC computation, per-category evaluation, and the few-shot harness.

AUC is the Mann-Whitney rank statistic with average-rank tie handling, i.e.
the probability that a random anomalous item outscores a random normal one
(ties counting one half). The ROC curve is built from the same scores and
its trapezoidal area agrees with the rank AUC.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.stats import rankdata

from .errors import EvaluationError
from .estimation import ModelParams, fit_model
from .ppf import ManifestItem, PointPatternSet, atomic_write_text, read_ppf
from .scoring import ScoringConfig, score_set


@dataclass(frozen=True)
class RocPoint:
    threshold: float
    fpr: float
    tpr: float


@dataclass(frozen=True)
class ItemScore:
    path: str
    label: int
    score: float


@dataclass(frozen=True)
class EvalReport:
    """Per-category evaluation result.

    ``scores`` are oriented so that higher always means more anomalous
    (the log-likelihood method is negated); ``auc`` is computed from them.
    """

    category: str
    method: str
    top_k_percent: float
    auc: float
    n_normal: int
    n_anomalous: int
    roc: tuple[RocPoint, ...]
    scores: tuple[ItemScore, ...]


@dataclass(frozen=True)
class FewShotResult:
    shots: int
    repeats: int
    seed: int
    mean_auc: float
    per_repeat_auc: tuple[float, ...]
    warnings: tuple[str, ...] = field(default_factory=tuple)


def _split_scores(scored: Sequence[tuple[float, int]]) -> tuple[np.ndarray, np.ndarray]:
    if len(scored) == 0:
        raise EvaluationError("no scores to evaluate")
    scores = np.asarray([s for s, _ in scored], dtype=np.float64)
    labels = np.asarray([l for _, l in scored], dtype=np.int64)
    if not np.all((labels == 0) | (labels == 1)):
        raise EvaluationError("labels must be 0 or 1")
    if labels.min() == labels.max():
        raise EvaluationError("evaluation needs both a normal and an anomalous class")
    return scores, labels


def auc(scored: Sequence[tuple[float, int]]) -> float:
    """Rank AUC of (score, label) pairs; higher score = anomalous."""
    scores, labels = _split_scores(scored)
    n1 = int(labels.sum())
    n0 = len(labels) - n1
    ranks = rankdata(scores, method="average")
    rank_sum = float(ranks[labels == 1].sum())
    return (rank_sum - n1 * (n1 + 1) / 2.0) / (n0 * n1)


def roc_curve(scored: Sequence[tuple[float, int]]) -> tuple[RocPoint, ...]:
    """ROC points at every distinct threshold, from (fpr=0, tpr=0) to (1, 1)."""
    scores, labels = _split_scores(scored)
    n1 = int(labels.sum())
    n0 = len(labels) - n1
    order = np.argsort(-scores, kind="stable")
    sorted_scores = scores[order]
    sorted_labels = labels[order]
    tp = np.cumsum(sorted_labels)
    fp = np.cumsum(1 - sorted_labels)
    # A threshold sits at the last occurrence of each distinct score.
    last = np.nonzero(np.diff(sorted_scores, append=-np.inf) != 0.0)[0]
    points = [RocPoint(threshold=math.inf, fpr=0.0, tpr=0.0)]
    for i in last:
        points.append(
            RocPoint(
                threshold=float(sorted_scores[i]),
                fpr=float(fp[i]) / n0,
                tpr=float(tp[i]) / n1,
            )
        )
    return tuple(points)


def trapezoid_area(roc: Sequence[RocPoint]) -> float:
    fpr = np.asarray([p.fpr for p in roc])
    tpr = np.asarray([p.tpr for p in roc])
    return float(np.trapezoid(tpr, fpr))


def oriented_score(raw: float, method: str) -> float:
    """Flip log-likelihoods so that higher always means more anomalous."""
    return -raw if method == "loglik" else raw


def _score_pairs(
    pairs: Sequence[tuple[PointPatternSet, int]],
    model: ModelParams,
    config: ScoringConfig,
    jobs: int = 1,
) -> list[tuple[float, int]]:
    def one(pair: tuple[PointPatternSet, int]) -> tuple[float, int]:
        s, label = pair
        return oriented_score(score_set(s, model, config), config.method), label

    if jobs <= 1:
        return [one(p) for p in pairs]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(one, pairs))


def evaluate_category(
    model: ModelParams,
    test_items: Sequence[ManifestItem],
    config: ScoringConfig,
    category: str = "",
    jobs: int = 1,
) -> EvalReport:
    """Score every test item and assemble the per-category report."""
    loaded: list[tuple[PointPatternSet, int]] = []
    for item in test_items:
        try:
            loaded.append((read_ppf(item.path), item.label))
        except FileNotFoundError as exc:
            raise EvaluationError(f"test item file missing: {item.path}") from exc
    scored = _score_pairs(loaded, model, config, jobs=jobs)
    labels = [label for _, label in scored]
    roc = roc_curve(scored)
    return EvalReport(
        category=category,
        method=config.method,
        top_k_percent=config.top_k_percent,
        auc=auc(scored),
        n_normal=labels.count(0),
        n_anomalous=labels.count(1),
        roc=roc,
        scores=tuple(
            ItemScore(path=item.path, label=item.label, score=score)
            for item, (score, _) in zip(test_items, scored)
        ),
    )


def few_shot_experiment(
    train_pool: Sequence[PointPatternSet],
    test_items: Sequence[tuple[PointPatternSet, int]],
    shots: Sequence[int],
    repeats: int = 10,
    seed: int = 0,
    config: ScoringConfig = ScoringConfig(),
    jobs: int = 1,
) -> list[FewShotResult]:
    """Fit-and-evaluate over repeated small training draws.

    For every shot count n and repeat r, a fresh generator keyed by
    (seed, n, r) draws n training sets without replacement, so results are
    bit-reproducible and independent of execution order or parallelism.
    """
    if repeats < 1:
        raise EvaluationError("repeats must be >= 1")
    if seed < 0:
        raise EvaluationError("seed must be nonnegative")
    for n in shots:
        if n < 1 or n > len(train_pool):
            raise EvaluationError(
                f"shot count {n} outside the training pool size {len(train_pool)}"
            )

    def one_repeat(shot: int, rep: int) -> tuple[float, list[str]]:
        rng = np.random.default_rng([seed, shot, rep])
        idx = rng.choice(len(train_pool), size=shot, replace=False)
        model = fit_model([train_pool[i] for i in idx])
        # degeneracy notes built from the model itself: deterministic and
        # safe under parallel repeats (unlike capturing global warnings)
        notes: list[str] = []
        if model.rho == 0.0:
            notes.append("degenerate fit: all drawn training sets are empty")
        if model.jitter_applied > 0.0:
            notes.append(
                "degenerate fit: covariance needed "
                f"{model.jitter_applied:.3e} diagonal jitter"
            )
        scored = _score_pairs(test_items, model, config)
        return auc(scored), notes

    tasks = [(shot, rep) for shot in shots for rep in range(repeats)]
    if jobs <= 1:
        outcomes = [one_repeat(shot, rep) for shot, rep in tasks]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(lambda t: one_repeat(*t), tasks))

    results: list[FewShotResult] = []
    for i, shot in enumerate(shots):
        chunk = outcomes[i * repeats : (i + 1) * repeats]
        per_repeat = tuple(a for a, _ in chunk)
        notes = tuple(msg for _, msgs in chunk for msg in msgs)
        results.append(
            FewShotResult(
                shots=shot,
                repeats=repeats,
                seed=seed,
                mean_auc=float(np.mean(per_repeat)),
                per_repeat_auc=per_repeat,
                warnings=notes,
            )
        )
    return results


def report_to_dict(report: EvalReport) -> dict:
    return {
        "category": report.category,
        "method": report.method,
        "top_k_percent": report.top_k_percent,
        "auc": report.auc,
        "n_normal": report.n_normal,
        "n_anomalous": report.n_anomalous,
        "roc": [
            {"threshold": p.threshold, "fpr": p.fpr, "tpr": p.tpr} for p in report.roc
        ],
        "scores": [
            {"path": s.path, "label": s.label, "score": s.score} for s in report.scores
        ],
    }


def write_report_json(report: EvalReport, path: str | Path) -> None:
    doc = report_to_dict(report)
    # JSON has no Infinity literal; the sentinel threshold becomes null.
    for p in doc["roc"]:
        if p["threshold"] == math.inf:
            p["threshold"] = None
    atomic_write_text(path, json.dumps(doc, indent=2) + "\n")


def write_roc_csv(report: EvalReport, path: str | Path) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["threshold", "fpr", "tpr"])
    for p in report.roc:
        writer.writerow([f"{p.threshold:.17g}", f"{p.fpr:.17g}", f"{p.tpr:.17g}"])
    atomic_write_text(path, buf.getvalue())


def write_few_shot_csv(results: Sequence[FewShotResult], path: str | Path) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["shots", "repeat", "auc"])
    for result in results:
        for rep, value in enumerate(result.per_repeat_auc):
            writer.writerow([result.shots, rep, f"{value:.17g}"])
    atomic_write_text(path, buf.getvalue())
