"""Stratified train/test splits and cross-validation folds.

Allocation is done per class: each class's indices are shuffled and the
test share rounded to the nearest sample (remainder to train), so class
ratios in each part stay within one sample of the requested fraction.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .schema import Dataset
from .seeding import rng_for


@dataclass(frozen=True)
class SplitPlan:
    splits: tuple  # ((train_idx, test_idx), ...)
    test_fraction: float
    seed: int

    def __len__(self) -> int:
        return len(self.splits)

    def __iter__(self):
        return iter(self.splits)


def stratified_split(
    ds: Dataset, test_fraction: float = 0.3, n_repeats: int = 5, seed: int = 0
) -> SplitPlan:
    """Repeated class-preserving random splits, deterministic per seed."""
    if not (0.0 < test_fraction < 1.0):
        raise DataError("test_fraction must lie strictly between 0 and 1")
    if n_repeats < 1:
        raise DataError("n_repeats must be >= 1")
    labels = ds.labels
    counts = np.bincount(labels, minlength=ds.schema.n_classes)
    for c, count in enumerate(counts):
        if 0 < count < 2:
            raise DataError(f"class {ds.schema.classes[c]!r} has a single sample")
    rng = rng_for(seed, "stratified_split")
    by_class = [np.nonzero(labels == c)[0] for c in range(ds.schema.n_classes)]
    splits = []
    for _ in range(n_repeats):
        train, test = [], []
        for idx in by_class:
            if len(idx) == 0:
                continue
            perm = idx[rng.permutation(len(idx))]
            n_test = int(np.floor(len(idx) * test_fraction + 0.5))
            n_test = min(max(n_test, 1), len(idx) - 1)
            test.append(perm[:n_test])
            train.append(perm[n_test:])
        train_idx = np.sort(np.concatenate(train))
        test_idx = np.sort(np.concatenate(test))
        splits.append((train_idx, test_idx))
    return SplitPlan(splits=tuple(splits), test_fraction=test_fraction, seed=seed)


def stratified_folds(labels: np.ndarray, k: int, seed: int) -> list:
    """k stratified folds as (train_idx, val_idx) pairs.

    Every class present must have at least k members so that each fold's
    training part contains all classes.
    """
    labels = np.asarray(labels, dtype=np.int64)
    if k < 2:
        raise DataError("need at least 2 folds")
    rng = rng_for(seed, "folds")
    n_classes = int(labels.max()) + 1
    assignment = np.empty(len(labels), dtype=np.int64)
    for c in range(n_classes):
        idx = np.nonzero(labels == c)[0]
        if len(idx) == 0:
            continue
        if len(idx) < k:
            raise DataError(
                f"class {c} has {len(idx)} samples; cannot build {k} stratified folds"
            )
        perm = idx[rng.permutation(len(idx))]
        assignment[perm] = np.arange(len(perm)) % k
    folds = []
    everything = np.arange(len(labels))
    for f in range(k):
        val = everything[assignment == f]
        train = everything[assignment != f]
        folds.append((train, val))
    return folds
