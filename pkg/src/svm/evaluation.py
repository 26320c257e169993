"""Confusion matrices, k-fold cross-validation and feature-family ablations."""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, NamedTuple, Sequence, Tuple

import numpy as np

from errors import DimensionMismatch, TooFewSamples
from features.vector import FeatureVector
from svm.linear_svm import Sample, as_labels, predict_many, train

logger = logging.getLogger(__name__)

# Family combinations reported by the ablation table, in display order.
ABLATIONS = (
    ("Only IS", ("IS",)),
    ("Only CA", ("CA",)),
    ("Only CT", ("CT",)),
    ("IS + CA", ("IS", "CA")),
    ("CT + CA", ("CT", "CA")),
    ("IS + CT", ("IS", "CT")),
    ("All", ("IS", "CA", "CT")),
)


@dataclass(frozen=True)
class ConfusionMatrix:
    """Binary confusion counts; the positive class is the 2-D plot."""

    tn: int = 0
    fp: int = 0
    fn: int = 0
    tp: int = 0

    @classmethod
    def from_predictions(cls, truth: Sequence[int], predicted: Sequence[int]) -> "ConfusionMatrix":
        truth = np.asarray(truth)
        predicted = np.asarray(predicted)
        if truth.shape != predicted.shape:
            raise DimensionMismatch("truth and prediction lengths differ")
        return cls(
            tn=int(np.sum((truth < 0) & (predicted < 0))),
            fp=int(np.sum((truth < 0) & (predicted > 0))),
            fn=int(np.sum((truth > 0) & (predicted < 0))),
            tp=int(np.sum((truth > 0) & (predicted > 0))),
        )

    @property
    def total(self) -> int:
        return self.tn + self.fp + self.fn + self.tp

    @property
    def accuracy(self) -> float:
        return (self.tp + self.tn) / self.total if self.total else 0.0

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        return ConfusionMatrix(self.tn + other.tn, self.fp + other.fp, self.fn + other.fn, self.tp + other.tp)

    def to_dict(self) -> dict:
        return {"tn": self.tn, "fp": self.fp, "fn": self.fn, "tp": self.tp}

    def format_table(self) -> str:
        """Rows are the true class, columns the predicted class."""
        rows = [
            ("Class", "Non 2-D", "2-D"),
            ("Non 2-D", str(self.tn), str(self.fp)),
            ("2-D", str(self.fn), str(self.tp)),
        ]
        widths = [max(len(r[i]) for r in rows) for i in range(3)]
        return "\n".join("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(r)).rstrip() for r in rows)


class CrossValidation(NamedTuple):
    accuracy: float
    folds: List[ConfusionMatrix]


def evaluate(model, samples: Sequence[Sample], labels: Sequence[int]) -> ConfusionMatrix:
    return ConfusionMatrix.from_predictions(as_labels(labels), predict_many(model, samples))


def cross_validate(
    samples: Sequence[Sample],
    labels: Sequence[int],
    k: int = 3,
    c: float = 1.0,
    seed: int = 0,
    epochs: int = 200,
    workers: int = 1,
) -> CrossValidation:
    """
    k-fold cross-validation of the linear SVM.

    Folds come from a seeded shuffle split into ``k`` contiguous parts; every
    sample is validated exactly once. Fold ``f`` trains with seed ``seed + f``
    so results do not depend on evaluation order.

    Returns
    -------
    CrossValidation
        Mean fold accuracy in percent and the per-fold confusion matrices.
    """
    samples = list(samples)
    y = as_labels(labels)
    n = len(samples)
    if n != y.size:
        raise DimensionMismatch(f"{n} samples but {y.size} labels")
    if k < 2 or k > n:
        raise TooFewSamples(f"{k}-fold cross-validation needs 2 <= k <= {n}")

    order = np.random.default_rng(seed).permutation(n)
    parts = np.array_split(order, k)

    def run_fold(fold: int) -> ConfusionMatrix:
        held_out = parts[fold]
        train_idx = np.concatenate([p for i, p in enumerate(parts) if i != fold])
        model = train([samples[i] for i in train_idx], y[train_idx], c=c, epochs=epochs, seed=seed + fold)
        matrix = evaluate(model, [samples[i] for i in held_out], y[held_out])
        logger.debug(f"Fold {fold + 1}/{k}: accuracy {100 * matrix.accuracy:.2f}%")
        return matrix

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            folds = list(pool.map(run_fold, range(k)))
    else:
        folds = [run_fold(f) for f in range(k)]

    accuracy = 100.0 * float(np.mean([m.accuracy for m in folds]))
    logger.info(f"{k}-fold CV accuracy {accuracy:.2f}% over {n} samples")
    return CrossValidation(accuracy, folds)


def train_test_split(n: int, test_fraction: float, seed: int = 0) -> Tuple[np.ndarray, np.ndarray]:
    """Seeded split of ``range(n)`` into train and test index arrays."""
    if not 0.0 < test_fraction < 1.0:
        raise ValueError(f"test_fraction must lie in (0, 1), got {test_fraction}")
    order = np.random.default_rng(seed).permutation(n)
    n_test = max(1, int(round(n * test_fraction)))
    if n_test >= n:
        raise TooFewSamples(f"cannot hold out {n_test} of {n} samples")
    return np.sort(order[n_test:]), np.sort(order[:n_test])


def ablation_table(
    vectors: Sequence[FeatureVector],
    labels: Sequence[int],
    k: int = 3,
    c: float = 1.0,
    seed: int = 0,
    epochs: int = 200,
    workers: int = 1,
) -> List[Tuple[str, float]]:
    """Cross-validated accuracy for each feature-family combination."""
    rows = []
    for name, families in ABLATIONS:
        masked = [v.with_mask(families) for v in vectors]
        result = cross_validate(masked, labels, k=k, c=c, seed=seed, epochs=epochs, workers=workers)
        rows.append((name, result.accuracy))
    return rows


def format_ablation(rows: Sequence[Tuple[str, float]], k: int = 3) -> str:
    header = ("Features", f"% CV(#{k}) accuracy")
    body = [(name, f"{acc:.2f}") for name, acc in rows]
    width = max(len(r[0]) for r in [header] + body)
    return "\n".join(f"{a.ljust(width)}  {b}" for a, b in [header] + body)
