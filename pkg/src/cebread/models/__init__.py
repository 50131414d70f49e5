"""Uniform train/predict interface over the three classifier families.

Linear models (logreg, svm) standardize features internally: stats are
fitted on the training matrix, stored on the model, and re-applied at
predict time, so callers never standardize themselves. Class labels are
kept in sorted order and every argmax tie breaks to the lowest label.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import ModelError
from ..features import ColumnStats, FeatureMatrix, FeatureVector, standardize
from .forest import (
    DecisionTree,
    ForestClassifier,
    TreeNode,
    fit_forest,
    gini,
    train_tree,
)
from .logreg import LogisticModel, fit_logreg
from .svm import LinearBinarySvm, OvrSvm, RbfBinarySvm, fit_svm, resolve_gamma

MODEL_KINDS = ("logreg", "svm", "rforest")
MODEL_FORMAT_VERSION = 1


@dataclass(frozen=True)
class LogRegParams:
    penalty: str = "l2"
    C: float = 1.0
    max_iter: int = 1000
    tol: float = 1e-8
    optimizer: str = "auto"

    def __post_init__(self) -> None:
        if self.penalty not in ("l1", "l2"):
            raise ModelError(f"penalty must be l1 or l2, got {self.penalty!r}")
        if self.C <= 0:
            raise ModelError(f"C must be positive, got {self.C}")
        if self.max_iter < 1:
            raise ModelError(f"max_iter must be >= 1, got {self.max_iter}")
        if self.optimizer not in ("auto", "gradient-descent", "proximal"):
            raise ModelError(f"unknown optimizer {self.optimizer!r}")
        # The penalty dictates the update rule: plain gradient steps cannot
        # handle the l1 kink, and proximal steps reduce to gradient steps
        # only without it.
        if self.optimizer == "gradient-descent" and self.penalty == "l1":
            raise ModelError("l1 penalty requires proximal steps")
        if self.optimizer == "proximal" and self.penalty == "l2":
            raise ModelError("proximal steps are for the l1 penalty")


@dataclass(frozen=True)
class SvmParams:
    kernel: str = "linear"
    C: float = 1.0
    gamma: float | str = "scale"
    max_iter: int = 1000

    def __post_init__(self) -> None:
        if self.kernel not in ("linear", "rbf"):
            raise ModelError(f"kernel must be linear or rbf, got {self.kernel!r}")
        if self.C <= 0:
            raise ModelError(f"C must be positive, got {self.C}")
        if self.gamma != "scale" and float(self.gamma) <= 0:
            raise ModelError(f"gamma must be positive or 'scale', got {self.gamma!r}")
        if self.max_iter < 1:
            raise ModelError(f"max_iter must be >= 1, got {self.max_iter}")


@dataclass(frozen=True)
class ForestParams:
    n_estimators: int = 100
    max_features: str = "sqrt"
    max_depth: int | None = 20
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_estimators < 1:
            raise ModelError(f"n_estimators must be >= 1, got {self.n_estimators}")
        if self.max_features not in ("sqrt", "log2", "all"):
            raise ModelError(
                f"max_features must be sqrt, log2, or all, got {self.max_features!r}"
            )
        if self.max_depth is not None and self.max_depth < 1:
            raise ModelError(f"max_depth must be >= 1 or None, got {self.max_depth}")


PARAM_TYPES = {"logreg": LogRegParams, "svm": SvmParams, "rforest": ForestParams}


def make_params(kind: str, mapping: dict | None = None, **overrides):
    """Build the hyperparameter record for a model kind from plain values."""
    if kind not in PARAM_TYPES:
        raise ModelError(f"unknown model kind {kind!r}")
    merged = dict(mapping or {})
    merged.update(overrides)
    cls = PARAM_TYPES[kind]
    known = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(merged) - known)
    if unknown:
        raise ModelError(f"unknown {kind} hyperparameters: {', '.join(unknown)}")
    return cls(**merged)


@dataclass(frozen=True)
class TrainedModel:
    kind: str
    params: object
    schema: tuple[str, ...]
    classes: tuple[int, ...]
    inner: object
    stats: ColumnStats | None


def train(kind: str, matrix: FeatureMatrix, params=None) -> TrainedModel:
    """Fit a classifier of the given kind on a feature matrix."""
    if kind not in PARAM_TYPES:
        raise ModelError(f"unknown model kind {kind!r}")
    if params is None:
        params = PARAM_TYPES[kind]()
    if not isinstance(params, PARAM_TYPES[kind]):
        raise ModelError(f"hyperparameters {params!r} do not fit model kind {kind!r}")
    classes = tuple(int(c) for c in sorted(set(matrix.labels.tolist())))
    if len(classes) < 2:
        raise ModelError("training requires at least two distinct classes")
    y_idx = np.searchsorted(np.asarray(classes), matrix.labels)

    stats = None
    X = matrix.X
    if kind in ("logreg", "svm"):
        std_matrix, stats = standardize(matrix)
        X = std_matrix.X

    if kind == "logreg":
        inner = fit_logreg(
            X, y_idx, len(classes), params.penalty, params.C, params.max_iter, params.tol
        )
    elif kind == "svm":
        inner = fit_svm(
            X, y_idx, len(classes), params.kernel, params.C, params.gamma, params.max_iter
        )
    else:
        inner = fit_forest(
            X,
            y_idx,
            len(classes),
            params.n_estimators,
            params.max_features,
            params.max_depth,
            params.seed,
        )
    return TrainedModel(
        kind=kind, params=params, schema=matrix.schema, classes=classes, inner=inner, stats=stats
    )


def _transform(model: TrainedModel, X: np.ndarray) -> np.ndarray:
    if model.stats is None:
        return X
    divisor = np.where(model.stats.std == 0.0, 1.0, model.stats.std)
    return (X - model.stats.mean) / divisor


def predict(model: TrainedModel, x: FeatureVector) -> int:
    """Predicted class label for one feature vector."""
    if x.names != model.schema:
        raise ModelError("feature vector schema does not match the model")
    idx = model.inner.predict_class_index(_transform(model, x.values[None, :]))[0]
    return model.classes[int(idx)]


def predict_many(model: TrainedModel, matrix: FeatureMatrix) -> np.ndarray:
    """Predicted class labels for every row of a feature matrix."""
    if matrix.schema != model.schema:
        raise ModelError("feature matrix schema does not match the model")
    idx = model.inner.predict_class_index(_transform(model, matrix.X))
    return np.asarray(model.classes, dtype=int)[idx]


def mdi_importance(model: TrainedModel) -> FeatureVector:
    """Normalized mean-decrease-impurity importances of a forest model."""
    if model.kind != "rforest":
        raise ModelError("MDI importance is only defined for random forests")
    return FeatureVector(names=model.schema, values=model.inner.importance())


# --- serialization ---------------------------------------------------------


def _node_to_dict(node: TreeNode) -> dict:
    out: dict = {"counts": [int(c) for c in node.counts]}
    if not node.is_leaf:
        out["feature"] = int(node.feature)
        out["threshold"] = float(node.threshold)
        out["gain"] = float(node.gain)
        out["left"] = _node_to_dict(node.left)
        out["right"] = _node_to_dict(node.right)
    return out


def _node_from_dict(payload: dict) -> TreeNode:
    counts = np.asarray(payload["counts"], dtype=float)
    node = TreeNode(counts=counts, n_samples=int(counts.sum()))
    if "feature" in payload:
        node.feature = int(payload["feature"])
        node.threshold = float(payload["threshold"])
        node.gain = float(payload["gain"])
        node.left = _node_from_dict(payload["left"])
        node.right = _node_from_dict(payload["right"])
    return node


def _inner_to_dict(model: TrainedModel) -> dict:
    inner = model.inner
    if model.kind == "logreg":
        return {
            "weights": inner.weights.tolist(),
            "bias": inner.bias.tolist(),
            "converged": bool(inner.converged),
        }
    if model.kind == "svm":
        machines = []
        for m in inner.machines:
            if isinstance(m, LinearBinarySvm):
                machines.append({"w": m.w.tolist(), "b": m.b, "converged": m.converged})
            else:
                machines.append(
                    {
                        "support_x": m.support_x.tolist(),
                        "alpha_y": m.alpha_y.tolist(),
                        "b": m.b,
                        "gamma": m.gamma,
                        "converged": m.converged,
                    }
                )
        return {"machines": machines}
    return {
        "trees": [
            {"n_features": t.n_features, "root": _node_to_dict(t.root)}
            for t in inner.trees
        ]
    }


def _inner_from_dict(kind: str, payload: dict, n_classes: int):
    if kind == "logreg":
        return LogisticModel(
            weights=np.asarray(payload["weights"], dtype=float),
            bias=np.asarray(payload["bias"], dtype=float),
            converged=bool(payload["converged"]),
        )
    if kind == "svm":
        machines = []
        for m in payload["machines"]:
            if "w" in m:
                machines.append(
                    LinearBinarySvm(
                        w=np.asarray(m["w"], dtype=float),
                        b=float(m["b"]),
                        converged=bool(m["converged"]),
                    )
                )
            else:
                machines.append(
                    RbfBinarySvm(
                        support_x=np.asarray(m["support_x"], dtype=float),
                        alpha_y=np.asarray(m["alpha_y"], dtype=float),
                        b=float(m["b"]),
                        gamma=float(m["gamma"]),
                        converged=bool(m["converged"]),
                    )
                )
        return OvrSvm(machines=machines, converged=all(m.converged for m in machines))
    trees = [
        DecisionTree(
            root=_node_from_dict(t["root"]),
            n_features=int(t["n_features"]),
            n_classes=n_classes,
        )
        for t in payload["trees"]
    ]
    return ForestClassifier(trees=trees, n_classes=n_classes)


def model_to_dict(model: TrainedModel) -> dict:
    stats = None
    if model.stats is not None:
        stats = {
            "schema": list(model.stats.schema),
            "mean": model.stats.mean.tolist(),
            "std": model.stats.std.tolist(),
        }
    return {
        "format_version": MODEL_FORMAT_VERSION,
        "kind": model.kind,
        "hyperparameters": dataclasses.asdict(model.params),
        "schema": list(model.schema),
        "classes": list(model.classes),
        "standardization": stats,
        "parameters": _inner_to_dict(model),
    }


def model_from_dict(payload: dict) -> TrainedModel:
    version = payload.get("format_version")
    if version != MODEL_FORMAT_VERSION:
        raise ModelError(f"unsupported model format version {version!r}")
    kind = payload["kind"]
    if kind not in PARAM_TYPES:
        raise ModelError(f"unknown model kind {kind!r}")
    params = PARAM_TYPES[kind](**payload["hyperparameters"])
    classes = tuple(int(c) for c in payload["classes"])
    stats = None
    if payload["standardization"] is not None:
        raw = payload["standardization"]
        stats = ColumnStats(
            schema=tuple(raw["schema"]),
            mean=np.asarray(raw["mean"], dtype=float),
            std=np.asarray(raw["std"], dtype=float),
        )
    return TrainedModel(
        kind=kind,
        params=params,
        schema=tuple(payload["schema"]),
        classes=classes,
        inner=_inner_from_dict(kind, payload["parameters"], len(classes)),
        stats=stats,
    )


def save_model(model: TrainedModel, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(model_to_dict(model), sort_keys=True) + "\n", encoding="utf-8"
    )


def load_model(path: str | Path) -> TrainedModel:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ModelError(f"cannot read model file {path}: {exc}") from exc
    return model_from_dict(payload)


__all__ = [
    "MODEL_KINDS",
    "MODEL_FORMAT_VERSION",
    "LogRegParams",
    "SvmParams",
    "ForestParams",
    "TrainedModel",
    "make_params",
    "train",
    "predict",
    "predict_many",
    "mdi_importance",
    "gini",
    "train_tree",
    "fit_forest",
    "fit_logreg",
    "fit_svm",
    "resolve_gamma",
    "model_to_dict",
    "model_from_dict",
    "save_model",
    "load_model",
]
