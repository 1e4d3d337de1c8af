"""Synthetic two-class Gaussian data and logistic regression trained by SGD.

Grounds the binormal ROC model empirically: more training samples give a
classifier whose held-out AUC approaches ``Φ(separation / √2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, TrainingError, ValidationError
from .mathkernel import RandomStream
from .roc import EmpiricalRoc, auc_empirical

PROB_CLIP = 1e-12


@dataclass(frozen=True)
class SyntheticTask:
    dimension: int
    class_separation: float
    class_prior: float
    stream: RandomStream

    def __post_init__(self):
        if self.dimension < 1:
            raise ValidationError("dimension must be >= 1")
        if self.class_separation < 0:
            raise ValidationError("class_separation must be >= 0")
        if not 0.0 < self.class_prior < 1.0:
            raise ValidationError("class_prior must lie in (0, 1)")

    def class_means(self) -> tuple[np.ndarray, np.ndarray]:
        """Means at ``±separation/2`` along the unit diagonal."""
        u = np.ones(self.dimension) / math.sqrt(self.dimension)
        half = 0.5 * self.class_separation * u
        return -half, half


@dataclass(frozen=True)
class Dataset:
    features: np.ndarray  # (n, dimension)
    labels: np.ndarray  # (n,) of 0/1

    def __len__(self):
        return len(self.labels)


@dataclass(frozen=True)
class SgdConfig:
    iterations: int | None = None  # None -> 10 passes over the data
    step_scale: float = 1.0
    smoothness: float = 1.0
    batch_size: int = 1

    def __post_init__(self):
        if self.iterations is not None and self.iterations < 1:
            raise ValidationError("iterations must be positive")
        if not (self.step_scale > 0 and self.smoothness > 0 and self.batch_size >= 1):
            raise ValidationError("step_scale, smoothness and batch_size must be positive")


@dataclass
class TrainedClassifier:
    weights: np.ndarray  # bias last
    train_log_loss: float
    threshold: float = 0.5
    epoch_losses: list[float] = field(default_factory=list)

    def predict_proba(self, features: np.ndarray) -> np.ndarray:
        return predict_proba(self.weights, features)

    def predict(self, features: np.ndarray) -> np.ndarray:
        return (self.predict_proba(features) >= self.threshold).astype(int)


def generate_dataset(task: SyntheticTask, n: int, stream: RandomStream | None = None) -> Dataset:
    """``n`` i.i.d. labelled samples; identical ``(stream, n)`` gives identical data."""
    if n < 1:
        raise DomainError("n must be >= 1")
    rng = (stream or task.stream).generator()
    labels = (rng.random(n) < task.class_prior).astype(int)
    mu0, mu1 = task.class_means()
    means = np.where(labels[:, None] == 1, mu1, mu0)
    features = means + rng.standard_normal((n, task.dimension))
    return Dataset(features, labels)


def _design(features: np.ndarray) -> np.ndarray:
    return np.hstack([features, np.ones((features.shape[0], 1))])


def predict_proba(weights: np.ndarray, features: np.ndarray) -> np.ndarray:
    z = _design(features) @ weights
    return np.clip(0.5 * (1.0 + np.tanh(0.5 * z)), PROB_CLIP, 1.0 - PROB_CLIP)


def log_loss(weights: np.ndarray, features: np.ndarray, labels: np.ndarray) -> float:
    """Mean negative log-likelihood, computed as ``log(1 + e^z) - y z``."""
    z = _design(features) @ weights
    return float(np.mean(np.logaddexp(0.0, z) - labels * z))


def log_loss_grad(weights: np.ndarray, features: np.ndarray, labels: np.ndarray) -> np.ndarray:
    x = _design(features)
    z = x @ weights
    resid = 0.5 * (1.0 + np.tanh(0.5 * z)) - labels
    return x.T @ resid / len(labels)


def train_logistic_sgd(data: Dataset, cfg: SgdConfig = SgdConfig(), stream: RandomStream | None = None) -> TrainedClassifier:
    """Minibatch SGD with step ``e / (beta_s * t)``.

    Sample order is drawn from ``stream`` (default: a fixed seed), so training
    is deterministic.
    """
    n = len(data)
    if n == 0:
        raise DomainError("cannot train on an empty dataset")
    if not np.all((data.labels == 0) | (data.labels == 1)):
        raise DomainError("labels must be 0 or 1")
    iterations = cfg.iterations if cfg.iterations is not None else 10 * n
    rng = (stream or RandomStream(0)).generator()
    x = _design(data.features)
    y = data.labels.astype(float)
    w = np.zeros(x.shape[1])
    b = min(cfg.batch_size, n)
    idx = rng.integers(0, n, size=(iterations, b))
    per_epoch = max(1, n // b)
    epoch_losses = []
    # divergence is detected and reported below, so silence numpy's own warnings
    with np.errstate(over="ignore", invalid="ignore"):
        for t in range(1, iterations + 1):
            rows = idx[t - 1]
            xb = x[rows]
            z = xb @ w
            resid = 0.5 * (1.0 + np.tanh(0.5 * z)) - y[rows]
            w -= (cfg.step_scale / (cfg.smoothness * t)) * (xb.T @ resid) / b
            if t % per_epoch == 0:
                epoch_losses.append(log_loss(w, data.features, data.labels))
                if not math.isfinite(epoch_losses[-1]):
                    raise TrainingError(f"log loss became {epoch_losses[-1]} at iteration {t}")
        final = log_loss(w, data.features, data.labels)
    if not (math.isfinite(final) and np.all(np.isfinite(w))):
        raise TrainingError(f"training diverged: loss={final}, weights={w}")
    return TrainedClassifier(w, final, 0.5, epoch_losses)


def roc_from_scores(scores: np.ndarray, labels: np.ndarray, n_thresholds: int | None = None) -> EmpiricalRoc:
    """ROC of the rule ``score >= tau``.

    With ``n_thresholds=None`` every distinct score is a threshold (exact,
    tie-aware); otherwise thresholds are that many score quantiles.
    """
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels)
    n_pos = int(labels.sum())
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise DomainError("ROC needs both classes present")
    if n_thresholds is None:
        taus = np.unique(scores)[::-1]
    else:
        taus = np.unique(np.quantile(scores, np.linspace(0.0, 1.0, n_thresholds)))[::-1]
    order = np.argsort(scores)
    sorted_scores = scores[order]
    pos_below = np.concatenate([[0], np.cumsum(labels[order])])
    # number of samples with score >= tau
    first = np.searchsorted(sorted_scores, taus, side="left")
    tp = n_pos - pos_below[first]
    fp = (len(scores) - first) - tp
    return EmpiricalRoc.from_pairs(zip((fp / n_neg).tolist(), (tp / n_pos).tolist()))


def empirical_roc(clf: TrainedClassifier, data: Dataset, n_thresholds: int | None = None) -> EmpiricalRoc:
    return roc_from_scores(clf.predict_proba(data.features), data.labels, n_thresholds)


def generalization_gap(
    task: SyntheticTask,
    n_train: int,
    n_test: int,
    cfg: SgdConfig = SgdConfig(),
    test_stream: RandomStream | None = None,
) -> float:
    """``|train log loss - held-out log loss|``.

    The held-out sample comes from ``test_stream`` (default: a substream of
    the task stream distinct from the training draw).
    """
    train = generate_dataset(task, n_train)
    test = generate_dataset(task, n_test, test_stream or task.stream.substream(1))
    clf = train_logistic_sgd(train, cfg, task.stream.substream(2))
    return abs(clf.train_log_loss - log_loss(clf.weights, test.features, test.labels))


def held_out_auc(task: SyntheticTask, n_train: int, n_test: int, cfg: SgdConfig = SgdConfig()) -> float:
    train = generate_dataset(task, n_train)
    test = generate_dataset(task, n_test, task.stream.substream(1))
    clf = train_logistic_sgd(train, cfg, task.stream.substream(2))
    return auc_empirical(empirical_roc(clf, test))
