"""
Two-class linear soft-margin SVM trained by primal subgradient descent.

Objective: ``(1/2)||w||^2 + C * sum(max(0, 1 - y_i (w.x_i + b)))`` over
min-max scaled inputs. Labels are +1 (2-D plot) and -1 (anything else).
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from errors import DimensionMismatch, SingleClassData, TooFewSamples
from features.vector import FeatureVector

logger = logging.getLogger(__name__)

Sample = Union[FeatureVector, Sequence[float], np.ndarray]


def as_matrix(samples: Sequence[Sample]) -> np.ndarray:
    """Stack feature vectors (or plain rows) into a 2-D float array."""
    rows = [s.values if isinstance(s, FeatureVector) else np.asarray(s, dtype=np.float64) for s in samples]
    if not rows:
        return np.zeros((0, 0))
    dims = {r.shape for r in rows}
    if len(dims) != 1 or rows[0].ndim != 1:
        raise DimensionMismatch(f"samples have inconsistent shapes: {sorted(dims)}")
    return np.vstack(rows).astype(np.float64)


def as_labels(labels: Sequence[int]) -> np.ndarray:
    y = np.asarray(labels, dtype=np.float64).ravel()
    if not np.isin(y, (-1.0, 1.0)).all():
        raise ValueError("labels must be +1 or -1")
    return y


@dataclass(eq=False)
class SvmModel:
    """
    Linear decision function with its input scaling.

    Attributes
    ----------
    weights : numpy.ndarray
        One weight per (scaled) feature.
    bias : float
    c_param : float
        Soft-margin constant used for training.
    scale_min, scale_range : numpy.ndarray
        Per-coordinate min-max scaling fitted on the training data;
        identity when omitted.
    objective_history : list of float
        Best objective value after each epoch (not persisted).
    """

    weights: np.ndarray
    bias: float
    c_param: float = 1.0
    scale_min: Optional[np.ndarray] = None
    scale_range: Optional[np.ndarray] = None
    objective_history: List[float] = field(default_factory=list)

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64).ravel()
        self.bias = float(self.bias)
        self.c_param = float(self.c_param)
        if not self.c_param > 0:
            raise ValueError(f"c_param must be positive, got {self.c_param}")
        dim = self.weights.size
        self.scale_min = np.zeros(dim) if self.scale_min is None else np.asarray(self.scale_min, dtype=np.float64).ravel()
        self.scale_range = np.ones(dim) if self.scale_range is None else np.asarray(self.scale_range, dtype=np.float64).ravel()
        if self.scale_min.size != dim or self.scale_range.size != dim:
            raise DimensionMismatch("scaling vectors must match the weight dimension")
        bad = np.flatnonzero(~(np.isfinite(self.scale_range) & (self.scale_range > 0)))
        if bad.size:
            raise ValueError(f"scale_range must be positive and finite, feature {int(bad[0])} has {self.scale_range[bad[0]]}")

    @property
    def dim(self) -> int:
        return int(self.weights.size)

    def scale(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.shape[-1] != self.dim:
            raise DimensionMismatch(f"model expects {self.dim} features, got {X.shape[-1]}")
        return (X - self.scale_min) / self.scale_range

    def decision_function(self, X: np.ndarray) -> np.ndarray:
        return self.scale(X) @ self.weights + self.bias


def objective(w: np.ndarray, b: float, X: np.ndarray, y: np.ndarray, c: float) -> float:
    """Primal soft-margin objective."""
    margins = y * (X @ w + b)
    return float(0.5 * w @ w + c * np.maximum(0.0, 1.0 - margins).sum())


def objective_subgradient(w: np.ndarray, b: float, X: np.ndarray, y: np.ndarray, c: float) -> Tuple[np.ndarray, float]:
    """Subgradient of :func:`objective` with respect to ``(w, b)``."""
    margins = y * (X @ w + b)
    active = margins < 1.0
    grad_w = w - c * (y[active, None] * X[active]).sum(axis=0)
    grad_b = -c * float(y[active].sum())
    return grad_w, grad_b


def fit_scaling(X: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    lo = X.min(axis=0)
    span = X.max(axis=0) - lo
    span[span == 0] = 1.0
    return lo, span


def optimal_bias(scores: np.ndarray, y: np.ndarray) -> float:
    """
    Exact minimiser of the hinge term over an unregularised bias.

    The hinge sum is convex and piecewise linear in ``b`` with kinks at
    ``y_i - scores_i``; the midpoint of the optimal kink interval is returned.
    """
    pos = np.sort(1.0 - scores[y > 0])
    neg = np.sort(-1.0 - scores[y < 0])
    candidates = np.concatenate([pos, neg])
    neg_le = np.searchsorted(neg, candidates, side="right")
    neg_lt = np.searchsorted(neg, candidates, side="left")
    pos_gt = pos.size - np.searchsorted(pos, candidates, side="right")
    pos_ge = pos.size - np.searchsorted(pos, candidates, side="left")
    slope_right = neg_le - pos_gt
    slope_left = neg_lt - pos_ge
    optimal = candidates[(slope_left <= 0) & (slope_right >= 0)]
    return float(0.5 * (optimal.min() + optimal.max()))


def train(
    samples: Sequence[Sample],
    labels: Sequence[int],
    c: float = 1.0,
    epochs: int = 200,
    seed: int = 0,
) -> SvmModel:
    """
    Fit a linear SVM.

    Each epoch visits the samples in a seeded shuffle and takes Pegasos-style
    steps ``1/(lambda*t)`` on ``w`` with ``lambda = 1/(C*n)``. At every epoch
    checkpoint the bias is re-optimised exactly and the objective evaluated;
    the best checkpoint is kept, so ``objective_history`` is non-increasing.

    Parameters
    ----------
    samples : sequence of FeatureVector or array rows
    labels : sequence of int
        +1 or -1 per sample.
    c : float, optional
        Soft-margin constant (default 1.0).
    epochs : int, optional
        Passes over the data (default 200).
    seed : int, optional
        Shuffle seed.

    Returns
    -------
    SvmModel

    Raises
    ------
    DimensionMismatch
        Sample and label counts differ, or samples disagree in length.
    SingleClassData
        Only one label value occurs.
    """
    X = as_matrix(samples)
    y = as_labels(labels)
    if X.shape[0] != y.size:
        raise DimensionMismatch(f"{X.shape[0]} samples but {y.size} labels")
    if y.size < 2:
        raise TooFewSamples("training needs at least two samples")
    if np.unique(y).size < 2:
        raise SingleClassData("training data contains a single class")
    if c <= 0:
        raise ValueError(f"C must be positive, got {c}")

    lo, span = fit_scaling(X)
    Xs = (X - lo) / span
    n, dim = Xs.shape

    lam = 1.0 / (c * n)
    radius = 1.0 / np.sqrt(lam)
    rng = np.random.default_rng(seed)

    w = np.zeros(dim)
    b = 0.0
    best_w, best_b = w.copy(), b
    best_obj = objective(w, b, Xs, y, c)
    history = []
    t = 0
    for _ in range(epochs):
        for i in rng.permutation(n):
            t += 1
            eta = 1.0 / (lam * t)
            margin = y[i] * (Xs[i] @ w + b)
            w *= 1.0 - eta * lam
            if margin < 1.0:
                w += eta * y[i] * Xs[i]
            norm = np.linalg.norm(w)
            if norm > radius:
                w *= radius / norm
        b = optimal_bias(Xs @ w, y)
        current = objective(w, b, Xs, y, c)
        if current < best_obj:
            best_obj = current
            best_w, best_b = w.copy(), b
        history.append(best_obj)

    logger.debug(f"SVM trained: n={n}, dim={dim}, C={c}, epochs={epochs}, objective={best_obj:.6g}")
    return SvmModel(
        weights=best_w,
        bias=best_b,
        c_param=c,
        scale_min=lo,
        scale_range=span,
        objective_history=history,
    )


def predict(model: SvmModel, x: Sample) -> Tuple[int, float]:
    """
    Classify one sample.

    Returns
    -------
    tuple
        ``(label, score)`` with ``score = w.x + b`` on scaled input and
        ``label = +1`` iff ``score >= 0``.
    """
    values = x.values if isinstance(x, FeatureVector) else np.asarray(x, dtype=np.float64).ravel()
    score = float(model.decision_function(values))
    return (1 if score >= 0.0 else -1), score


def predict_many(model: SvmModel, samples: Sequence[Sample]) -> np.ndarray:
    scores = model.decision_function(as_matrix(samples))
    return np.where(scores >= 0.0, 1, -1)
