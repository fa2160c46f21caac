"""Versioned model serialization.

Every trained model dumps to a JSON document with a format version and a
kind tag; loading rebuilds a model whose predictions match the original
exactly (floats are serialized at full repr precision).
"""

import json

import numpy as np

from .errors import DataError
from .kernel import KernelModel
from .linear import LinearModel, LinearSVMModel
from .trees import ForestModel, TreeModel, TreeNode

FORMAT_VERSION = 1


def _node_to_dict(node: TreeNode) -> dict:
    d = {
        "prediction": int(node.prediction),
        "counts": [float(c) for c in node.counts],
        "n_samples": int(node.n_samples),
    }
    if not node.is_leaf:
        d.update(
            feature=int(node.feature),
            split_kind=node.kind,
            threshold=None if node.threshold is None else float(node.threshold),
            category=None if node.category is None else int(node.category),
            left=_node_to_dict(node.left),
            right=_node_to_dict(node.right),
        )
    return d


def _node_from_dict(d: dict) -> TreeNode:
    node = TreeNode(
        prediction=d["prediction"],
        counts=np.asarray(d["counts"], dtype=np.float64),
        n_samples=d["n_samples"],
    )
    if "feature" in d:
        node.feature = d["feature"]
        node.kind = d["split_kind"]
        node.threshold = d["threshold"]
        node.category = d["category"]
        node.left = _node_from_dict(d["left"])
        node.right = _node_from_dict(d["right"])
    return node


def model_to_dict(model) -> dict:
    base = {"format_version": FORMAT_VERSION, "kind": model.kind}
    if isinstance(model, LinearModel):
        base.update(
            penalty=model.penalty,
            C=model.C,
            weights=[[float(v) for v in row] for row in model.weights],
            intercepts=[float(v) for v in model.intercepts],
            n_iter=list(model.n_iter),
            converged=model.converged,
        )
    elif isinstance(model, LinearSVMModel):
        base.update(
            C=model.C,
            weights=[[float(v) for v in row] for row in model.weights],
            intercepts=[float(v) for v in model.intercepts],
            pairs=[list(p) for p in model.pairs],
            n_classes=model.n_classes,
            n_iter=list(model.n_iter),
            converged=model.converged,
        )
    elif isinstance(model, KernelModel):
        base.update(
            gamma=model.gamma,
            C=model.C,
            support=[[float(v) for v in row] for row in model.support],
            dual_coef=[[float(v) for v in row] for row in model.dual_coef],
            pair_intercepts=[float(v) for v in model.pair_intercepts],
            pairs=[list(p) for p in model.pairs],
            n_classes=model.n_classes,
            n_iter=list(model.n_iter),
            converged=model.converged,
        )
    elif isinstance(model, TreeModel):
        base.update(
            n_classes=model.n_classes,
            n_features=model.n_features,
            kinds=list(model.kinds),
            min_leaf=model.min_leaf,
            root=_node_to_dict(model.root),
        )
    elif isinstance(model, ForestModel):
        base.update(
            n_classes=model.n_classes,
            n_features=model.n_features,
            n_trees=model.n_trees,
            seed=model.seed,
            trees=[model_to_dict(t) for t in model.trees],
        )
    else:
        raise DataError(f"cannot serialize model of type {type(model).__name__}")
    return base


def model_from_dict(d: dict):
    version = d.get("format_version")
    if version != FORMAT_VERSION:
        raise DataError(f"unsupported model format version {version!r}")
    kind = d.get("kind")
    if kind == "linear":
        return LinearModel(
            weights=np.asarray(d["weights"], dtype=np.float64),
            intercepts=np.asarray(d["intercepts"], dtype=np.float64),
            penalty=d["penalty"],
            C=d["C"],
            n_iter=tuple(d["n_iter"]),
            converged=d["converged"],
        )
    if kind == "linear_svm":
        return LinearSVMModel(
            weights=np.asarray(d["weights"], dtype=np.float64),
            intercepts=np.asarray(d["intercepts"], dtype=np.float64),
            pairs=tuple(tuple(p) for p in d["pairs"]),
            n_classes=d["n_classes"],
            C=d["C"],
            n_iter=tuple(d["n_iter"]),
            converged=d["converged"],
        )
    if kind == "rbf_svm":
        return KernelModel(
            support=np.asarray(d["support"], dtype=np.float64),
            dual_coef=np.asarray(d["dual_coef"], dtype=np.float64),
            pair_intercepts=np.asarray(d["pair_intercepts"], dtype=np.float64),
            pairs=tuple(tuple(p) for p in d["pairs"]),
            n_classes=d["n_classes"],
            gamma=d["gamma"],
            C=d["C"],
            n_iter=tuple(d["n_iter"]),
            converged=d["converged"],
        )
    if kind == "cart":
        return TreeModel(
            root=_node_from_dict(d["root"]),
            n_classes=d["n_classes"],
            n_features=d["n_features"],
            kinds=tuple(d["kinds"]),
            min_leaf=d["min_leaf"],
        )
    if kind == "forest":
        trees = [model_from_dict(t) for t in d["trees"]]
        return ForestModel(
            trees=trees,
            n_classes=d["n_classes"],
            n_features=d["n_features"],
            n_trees=d["n_trees"],
            seed=d["seed"],
        )
    raise DataError(f"unknown model kind {kind!r}")


def dump_model(model) -> str:
    return json.dumps(model_to_dict(model), sort_keys=True)


def load_model(text: str):
    try:
        return model_from_dict(json.loads(text))
    except json.JSONDecodeError as exc:
        raise DataError(f"invalid model file: {exc}") from None
