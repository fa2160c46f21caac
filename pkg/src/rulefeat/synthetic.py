"""Synthetic three-class rule system and its sampled datasets.

The labeling map is a fixed decision tree over two uniform continuous
inputs, one binary input, and one three-way color input. Noise, when
requested, relabels each sample independently with a uniformly chosen
*different* class.
"""

import numpy as np

from .errors import DataError
from .schema import CATEGORICAL, CONTINUOUS, FeatureSchema, FeatureSpec, make_dataset
from .seeding import rng_for

X4_CATEGORIES = ("blue", "white", "red")
N_CLASSES = 3


def synthetic_schema() -> FeatureSchema:
    return FeatureSchema(
        features=(
            FeatureSpec("x1", CONTINUOUS),
            FeatureSpec("x2", CONTINUOUS),
            FeatureSpec("x3", CATEGORICAL, ("0", "1")),
            FeatureSpec("x4", CATEGORICAL, X4_CATEGORIES),
        ),
        target_name="y",
        classes=("0", "1", "2"),
    )


def label_synthetic(x1: float, x2: float, x3: int, x4: str) -> int:
    """Class of one point of the generating rule system.

    Evaluated in generating-tree order, so boundary points (e.g. x1
    exactly 0.7) resolve to the first matching branch.
    """
    if not (0.0 <= x1 <= 1.0 and 0.0 <= x2 <= 1.0):
        raise DataError("x1 and x2 must lie in [0, 1]")
    if x3 not in (0, 1):
        raise DataError("x3 must be 0 or 1")
    if x4 not in X4_CATEGORIES:
        raise DataError(f"x4 must be one of {X4_CATEGORIES}")
    if x4 == "red":
        if x3 == 1:
            return 0
        return 0 if x2 <= 0.5 else 1
    # blue or white
    if x1 >= 0.7:
        if x3 == 1:
            return 2
        return 0 if x2 > 0.2 else 1
    if x4 == "blue":
        return 0
    # white, x1 < 0.7
    return 0 if x1 > 0.5 else 1


def _label_array(x1, x2, x3, x4_idx) -> np.ndarray:
    red = x4_idx == 2
    high = x1 >= 0.7
    y = np.empty(len(x1), dtype=np.int64)
    # red branch
    y[red & (x3 == 1)] = 0
    y[red & (x3 == 0) & (x2 <= 0.5)] = 0
    y[red & (x3 == 0) & (x2 > 0.5)] = 1
    # blue/white, x1 >= 0.7
    bw = ~red
    y[bw & high & (x3 == 1)] = 2
    y[bw & high & (x3 == 0) & (x2 > 0.2)] = 0
    y[bw & high & (x3 == 0) & (x2 <= 0.2)] = 1
    # blue/white, x1 < 0.7
    blue = x4_idx == 0
    white = x4_idx == 1
    y[blue & ~high] = 0
    y[white & ~high & (x1 > 0.5)] = 0
    y[white & ~high & (x1 <= 0.5)] = 1
    return y


def generate_synthetic(n: int, noise_rate: float, seed: int):
    """Sample ``n`` labeled points, optionally corrupting labels.

    Inputs are uniform over their domains. With probability
    ``noise_rate`` a sample's label is replaced by a uniformly chosen
    different class. Deterministic for a fixed seed.
    """
    if n < 1:
        raise DataError("n must be >= 1")
    if not (0.0 <= noise_rate < 1.0):
        raise DataError("noise_rate must lie in [0, 1)")
    rng = rng_for(seed, "synthetic")
    x1 = rng.uniform(0.0, 1.0, n)
    x2 = rng.uniform(0.0, 1.0, n)
    x3 = rng.integers(0, 2, n)
    x4 = rng.integers(0, 3, n)
    y = _label_array(x1, x2, x3, x4)
    # Draw the noise variates for every sample so the clean prefix of the
    # stream does not depend on how many samples get flipped.
    flip = rng.random(n) < noise_rate
    offsets = rng.integers(1, N_CLASSES, n)
    y = np.where(flip, (y + offsets) % N_CLASSES, y)
    return make_dataset(synthetic_schema(), [x1, x2, x3, x4], y)
