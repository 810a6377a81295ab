"""Logistic-regression baseline and the cross-model comparison harness.

Training is full-batch gradient descent on mean log-loss with zero-initialized
weights, so results are deterministic for a given config. The comparison
harness runs every registered model under one identical CV scheme and seed.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .dtree import TreeModel, TreeParams
from .errors import ConfigError, ValidationError, WrongKindError
from .evaluate import KFOLD_SCHEME, LOOCV_SCHEME, kfold, loocv
from .forest import ForestModel, ForestParams
from .tabular import NUMERIC, Table


@dataclass(frozen=True)
class LogisticConfig:
    learning_rate: float = 0.1
    epochs: int = 500
    seed: int = 0


@dataclass(frozen=True)
class LogisticModel:
    weights: np.ndarray
    bias: float
    config: LogisticConfig
    feature_names: tuple[str, ...]
    loss_history: tuple[float, ...] = ()


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def log_loss(weights: np.ndarray, bias: float, X: np.ndarray, y: np.ndarray) -> float:
    """Mean binary cross-entropy of the linear model on (X, y)."""
    p = _sigmoid(X @ weights + bias)
    p = np.clip(p, 1e-12, 1.0 - 1e-12)
    return float(-np.mean(y * np.log(p) + (1.0 - y) * np.log(1.0 - p)))


def loss_gradient(weights: np.ndarray, bias: float, X: np.ndarray, y: np.ndarray):
    """Analytic gradient of mean log-loss wrt (weights, bias)."""
    p = _sigmoid(X @ weights + bias)
    r = p - y
    return X.T @ r / y.size, float(r.mean())


def _design_matrix(features: Table) -> np.ndarray:
    for col in features.schema:
        if col.kind != NUMERIC:
            raise WrongKindError(f"column {col.name!r} is not numeric; encode first")
    X = np.column_stack([np.asarray(features.column(n), dtype=np.float64) for n in features.schema.names])
    if np.isnan(X).any():
        raise ValidationError("features contain NaN; impute first")
    return X


def fit_logreg(features: Table, target, config: LogisticConfig = LogisticConfig()) -> LogisticModel:
    """Full-batch gradient descent from zero-initialized weights."""
    X = _design_matrix(features)
    y = np.asarray(target, dtype=np.float64)
    if y.shape != (X.shape[0],):
        raise ValidationError("feature/target row counts differ")
    w = np.zeros(X.shape[1])
    b = 0.0
    history = []
    for _ in range(config.epochs):
        history.append(log_loss(w, b, X, y))
        gw, gb = loss_gradient(w, b, X, y)
        w -= config.learning_rate * gw
        b -= config.learning_rate * gb
    w.setflags(write=False)
    return LogisticModel(w, b, config, features.schema.names, tuple(history))


def predict_logreg(model: LogisticModel, row) -> tuple[float, int]:
    """Probability and label for one row (mapping or ordered sequence)."""
    if isinstance(row, dict):
        try:
            x = np.array([float(row[n]) for n in model.feature_names])
        except KeyError as e:
            raise ValidationError(f"row is missing feature {e.args[0]!r}") from None
    else:
        x = np.asarray(row, dtype=np.float64)
    if x.shape != model.weights.shape:
        raise ValidationError(
            f"row has {x.size} features, model expects {model.weights.size}"
        )
    p = float(_sigmoid(np.array([x @ model.weights + model.bias]))[0])
    return p, (1 if p >= 0.5 else 0)


class LogisticRegressionModel:
    """Thin trainable wrapper with the shared fit/predict_row interface."""

    def __init__(self, config: LogisticConfig = LogisticConfig()):
        self.config = config
        self.model: LogisticModel | None = None

    def fit(self, features: Table, target) -> "LogisticRegressionModel":
        self.model = fit_logreg(features, target, self.config)
        return self

    def predict_row(self, row: dict) -> int:
        return predict_logreg(self.model, row)[1]


class MajorityModel:
    """Constant predictor of the training majority class (tie -> class 0)."""

    def __init__(self):
        self.label = 0

    def fit(self, features: Table, target) -> "MajorityModel":
        y = np.asarray(target, dtype=np.int64)
        ones = int(y.sum())
        self.label = 1 if ones > y.size - ones else 0
        return self

    def predict_row(self, row: dict) -> int:
        return self.label


def default_registry(
    forest_params: ForestParams = ForestParams(),
    tree_params: TreeParams = TreeParams(),
    logistic_config: LogisticConfig = LogisticConfig(),
):
    """Model factories keyed by name; each factory takes a fold seed."""
    return {
        "forest": lambda seed: ForestModel(replace(forest_params, seed=seed)),
        "tree": lambda seed: TreeModel(replace(tree_params, seed=seed)),
        "logreg": lambda seed: LogisticRegressionModel(replace(logistic_config, seed=seed)),
        "majority": lambda seed: MajorityModel(),
    }


def compare_models(
    features: Table,
    target,
    scheme: str = KFOLD_SCHEME,
    k: int = 5,
    seed: int = 0,
    registry: dict | None = None,
) -> list[tuple[str, float]]:
    """Evaluate every registered model under one CV scheme and seed.

    Returns (name, mean accuracy) pairs sorted best first; accuracy ties
    order alphabetically for determinism.
    """
    if registry is None:
        registry = default_registry()
    if len(registry) < 1:
        raise ConfigError("compare_models needs at least one registered model")
    rows = []
    for name in sorted(registry):
        factory = registry[name]
        if scheme == LOOCV_SCHEME:
            result = loocv(factory, features, target, seed=seed)
        elif scheme == KFOLD_SCHEME:
            result = kfold(factory, features, target, k, np.random.default_rng(seed), seed=seed)
        else:
            raise ConfigError(f"unknown CV scheme {scheme!r}")
        rows.append((name, result.mean_accuracy))
    rows.sort(key=lambda r: (-r[1], r[0]))
    return rows


def comparison_to_csv(rows: list[tuple[str, float]]) -> str:
    lines = ["model,accuracy"]
    lines += [f"{name},{acc!r}" for name, acc in rows]
    return "\n".join(lines) + "\n"
