"""Evaluation metrics: inverse-frequency weighted F1, rule-set stability,
and model complexity."""

from typing import Sequence

import numpy as np

from .errors import DataError
from .kernel import KernelModel
from .linear import LinearModel, LinearSVMModel
from .trees import ForestModel, TreeModel


def weighted_f1(y_true, y_pred, n_classes: int) -> float:
    """F1 on a 0-100 scale with errors weighted inversely to class frequency.

    Every sample carries weight n / (n_classes * count(its true class)),
    the confusion matrix accumulates those weights, and the score is the
    weight-averaged per-class one-vs-rest F1. Under these weights every
    class contributes equally, regardless of its frequency.
    """
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    if len(y_true) == 0:
        raise DataError("empty input")
    if len(y_true) != len(y_pred):
        raise DataError("length mismatch")
    counts = np.bincount(y_true, minlength=n_classes)
    class_w = np.zeros(n_classes)
    present = counts > 0
    class_w[present] = len(y_true) / (n_classes * counts[present])
    sample_w = class_w[y_true]
    confusion = np.zeros((n_classes, n_classes))
    np.add.at(confusion, (y_true, y_pred), sample_w)
    tp = np.diag(confusion)
    fp = confusion.sum(axis=0) - tp
    fn = confusion.sum(axis=1) - tp
    with np.errstate(invalid="ignore", divide="ignore"):
        precision = np.where(tp + fp > 0, tp / (tp + fp), 0.0)
        recall = np.where(tp + fn > 0, tp / (tp + fn), 0.0)
        f1 = np.where(
            precision + recall > 0,
            2.0 * precision * recall / (precision + recall),
            0.0,
        )
    support_w = confusion.sum(axis=1)
    return float(np.sum(support_w * f1) / np.sum(support_w) * 100.0)


def jaccard(a: frozenset, b: frozenset) -> float:
    """|A n B| / |A u B|; two empty sets count as identical."""
    if not a and not b:
        return 1.0
    if not a or not b:
        return 0.0
    return len(a & b) / len(a | b)


def jaccard_stability(tuple_sets: Sequence[frozenset]) -> tuple[float, float, list]:
    """Mean and std of the pairwise Jaccard scores, on a 0-100 scale."""
    if len(tuple_sets) < 2:
        raise DataError("stability needs at least two rule sets")
    pairwise = []
    for i in range(len(tuple_sets)):
        for j in range(i + 1, len(tuple_sets)):
            pairwise.append(jaccard(tuple_sets[i], tuple_sets[j]) * 100.0)
    arr = np.asarray(pairwise)
    return float(arr.mean()), float(arr.std()), pairwise


def model_complexity(model, n_input_columns: int) -> int:
    """Number of input columns the trained model actually uses.

    Dense models (L2 logistic, SVMs) use every input column; L1 models
    only the columns with a nonzero weight in some one-vs-rest task;
    trees and forests the distinct features appearing in any split.
    """
    if isinstance(model, (TreeModel, ForestModel)):
        return len(model.used_features())
    if isinstance(model, LinearModel) and model.penalty == "l1":
        return model.nonzero_feature_count()
    if isinstance(model, (LinearModel, LinearSVMModel, KernelModel)):
        return n_input_columns
    raise DataError(f"cannot measure complexity of {type(model).__name__}")
