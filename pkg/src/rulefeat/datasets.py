"""Built-in benchmark datasets.

The three all-continuous UCI tables (WDBC, iris, wine) are read from the
canonical copies bundled with scikit-learn, so no network access is
needed. The balance-scale table is the full 5^4 factorial of its four
inputs and is regenerated exactly from its labeling rule. Synthetic
datasets come from :mod:`rulefeat.synthetic`.
"""

import numpy as np

from .errors import ConfigError
from .schema import CATEGORICAL, CONTINUOUS, FeatureSchema, FeatureSpec, make_dataset
from .synthetic import generate_synthetic

BUILTIN_NAMES = (
    "wdbc",
    "iris",
    "wine",
    "balance_scale",
    "synthetic",
    "synthetic_noisy",
)

_SYNTH_DEFAULT_N = 500
_SYNTH_NOISE = 0.12


def _continuous_schema(feature_names, target_name, classes) -> FeatureSchema:
    return FeatureSchema(
        features=tuple(FeatureSpec(n, CONTINUOUS) for n in feature_names),
        target_name=target_name,
        classes=tuple(classes),
    )


def _from_sklearn(loader, target_name, class_names=None):
    bunch = loader()
    names = [str(n) for n in bunch.feature_names]
    classes = class_names or [str(c) for c in bunch.target_names]
    schema = _continuous_schema(names, target_name, classes)
    cols = [bunch.data[:, i] for i in range(bunch.data.shape[1])]
    return make_dataset(schema, cols, bunch.target.astype(np.int64))


def balance_scale_dataset():
    """All 625 weight/distance combinations with their exact tip labels."""
    cats = ("1", "2", "3", "4", "5")
    schema = FeatureSchema(
        features=(
            FeatureSpec("left_weight", CATEGORICAL, cats),
            FeatureSpec("left_distance", CATEGORICAL, cats),
            FeatureSpec("right_weight", CATEGORICAL, cats),
            FeatureSpec("right_distance", CATEGORICAL, cats),
        ),
        target_name="tip",
        classes=("L", "B", "R"),
    )
    rows = []
    labels = []
    for lw in range(1, 6):
        for ld in range(1, 6):
            for rw in range(1, 6):
                for rd in range(1, 6):
                    rows.append((lw - 1, ld - 1, rw - 1, rd - 1))
                    left, right = lw * ld, rw * rd
                    labels.append(0 if left > right else (1 if left == right else 2))
    cols = list(zip(*rows))
    return make_dataset(schema, cols, labels)


def builtin_dataset(name: str, seed: int = 0):
    """Load one of the named benchmark datasets."""
    if name == "wdbc":
        from sklearn.datasets import load_breast_cancer

        return _from_sklearn(load_breast_cancer, "diagnosis")
    if name == "iris":
        from sklearn.datasets import load_iris

        return _from_sklearn(load_iris, "species")
    if name == "wine":
        from sklearn.datasets import load_wine

        return _from_sklearn(
            load_wine, "cultivar", class_names=["cultivar_1", "cultivar_2", "cultivar_3"]
        )
    if name == "balance_scale":
        return balance_scale_dataset()
    if name == "synthetic":
        return generate_synthetic(_SYNTH_DEFAULT_N, 0.0, seed)
    if name == "synthetic_noisy":
        return generate_synthetic(_SYNTH_DEFAULT_N, _SYNTH_NOISE, seed)
    raise ConfigError(f"unknown builtin dataset {name!r} (choices: {', '.join(BUILTIN_NAMES)})")
