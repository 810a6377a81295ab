"""Bagged random forest: bootstrap sampling, per-node feature subsets,
majority voting, and mean-decrease-impurity feature importance.

Tree i derives its seed as ``params.seed + i``, so serial and parallel
builds are bit-identical and refitting with the same data and params
reproduces every tree, vote, and importance weight.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .dtree import (
    DecisionTree,
    Internal,
    TreeParams,
    build_tree,
    predict_tree,
    tree_from_json,
    tree_to_json,
)
from .errors import ConfigError, ValidationError
from .tabular import Table

SUBSET_SQRT = "sqrt"
SUBSET_ALL = "all"


@dataclass(frozen=True)
class ForestParams:
    n_estimators: int = 100
    max_depth: int | None = None
    feature_subset_size: int | str = SUBSET_SQRT  # count, "sqrt", or "all"
    bootstrap: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.n_estimators < 1:
            raise ConfigError("n_estimators must be >= 1")


@dataclass(frozen=True)
class RandomForest:
    trees: tuple[DecisionTree, ...]
    params: ForestParams
    feature_importances: dict[str, float]


class ForestPrediction(NamedTuple):
    label: int
    tally: dict[int, int]


def bootstrap_sample(features: Table, target: np.ndarray, rng: np.random.Generator):
    """Uniform with-replacement resample of n_rows rows, alignment preserved."""
    if features.n_rows < 1:
        raise ValidationError("cannot bootstrap an empty table")
    idx = rng.integers(0, features.n_rows, size=features.n_rows)
    return features.take(idx), np.asarray(target)[idx]


def _resolve_subset(size: int | str, n_features: int) -> int | None:
    if size == SUBSET_SQRT:
        s = math.isqrt(n_features)  # ceil(sqrt(p)) without float round-off
        return s if s * s == n_features else s + 1
    if size == SUBSET_ALL or size is None:
        return None
    size = int(size)
    if not 1 <= size <= n_features:
        raise ConfigError(f"feature_subset_size {size} not in [1, {n_features}]")
    return None if size == n_features else size


def fit_forest(features: Table, target, params: ForestParams = ForestParams()) -> RandomForest:
    """Fit n_estimators trees on bootstrap resamples with random node subsets."""
    if features.n_rows == 0:
        raise ValidationError("empty training data")
    target = np.asarray(target)
    subset = _resolve_subset(params.feature_subset_size, len(features.schema.names))
    tree_params = TreeParams(
        max_depth=params.max_depth,
        feature_subset_size=subset,
    )
    trees = []
    for i in range(params.n_estimators):
        rng = np.random.default_rng(params.seed + i)
        if params.bootstrap:
            sample, sample_y = bootstrap_sample(features, target, rng)
        else:
            sample, sample_y = features, target
        trees.append(build_tree(sample, sample_y, tree_params, rng=rng))
    importances = _importances(trees, features.schema.names)
    return RandomForest(tuple(trees), params, importances)


def _importances(trees, feature_names) -> dict[str, float]:
    """Mean decrease in weighted entropy impurity, normalized to sum 1."""
    acc = {name: 0.0 for name in feature_names}

    def walk(node, n_total):
        if isinstance(node, Internal):
            acc[node.column] += (node.n / n_total) * node.gain
            for child in node.children.values():
                walk(child, n_total)

    for tree in trees:
        walk(tree.root, tree.root.n)
    for name in acc:
        acc[name] /= len(trees)
    total = sum(acc.values())
    if total > 0.0:
        for name in acc:
            acc[name] /= total
    return acc


def feature_importance(forest: RandomForest) -> dict[str, float]:
    """Per-column importance weights (sum to 1 when any split exists)."""
    return dict(forest.feature_importances)


def predict_forest(forest: RandomForest, row: dict) -> ForestPrediction:
    """Majority vote over the trees; an exact tie goes to class 0."""
    tally = {0: 0, 1: 0}
    for tree in forest.trees:
        tally[predict_tree(tree, row).label] += 1
    label = 0 if tally[0] >= tally[1] else 1
    return ForestPrediction(label, tally)


class ForestModel:
    """Thin trainable wrapper with the shared fit/predict_row interface."""

    def __init__(self, params: ForestParams = ForestParams()):
        self.params = params
        self.forest: RandomForest | None = None

    def fit(self, features: Table, target) -> "ForestModel":
        self.forest = fit_forest(features, target, self.params)
        return self

    def predict_row(self, row: dict) -> int:
        return predict_forest(self.forest, row).label


def forest_to_json(forest: RandomForest) -> str:
    doc = {
        "params": {
            "n_estimators": forest.params.n_estimators,
            "max_depth": forest.params.max_depth,
            "feature_subset_size": forest.params.feature_subset_size,
            "bootstrap": forest.params.bootstrap,
            "seed": forest.params.seed,
        },
        "feature_importances": forest.feature_importances,
        "trees": [json.loads(tree_to_json(t)) for t in forest.trees],
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def forest_from_json(text: str) -> RandomForest:
    doc = json.loads(text)
    p = doc["params"]
    params = ForestParams(
        n_estimators=p["n_estimators"],
        max_depth=p["max_depth"],
        feature_subset_size=p["feature_subset_size"],
        bootstrap=p["bootstrap"],
        seed=p["seed"],
    )
    trees = tuple(tree_from_json(json.dumps(t)) for t in doc["trees"])
    return RandomForest(trees, params, dict(doc["feature_importances"]))
