"""Entropy-based decision trees with ID3-style recursive construction.

Categorical columns split multiway (one child per category present at the
node) and are consumed once per root-to-leaf path; numeric columns split
binary at the node-local arithmetic mean into {>= theta, < theta} branches
and may be reused deeper down. Split selection maximizes information gain;
exact ties resolve by schema order or by a seeded rng, and every evaluated
candidate plus the gain-equivalence groups are reported so callers can
enumerate alternative trees.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from . import kernels
from .errors import ConfigError, ValidationError
from .tabular import CATEGORICAL, NUMERIC, Table

TIE_EPS = 1e-9
MIN_GAIN = 1e-12

TIE_FIRST = "first"
TIE_RANDOM = "random"


def entropy(class_counts: Sequence[float]) -> float:
    """Shannon entropy in bits of a nonnegative count vector."""
    counts = np.asarray(class_counts, dtype=np.float64)
    if counts.size == 0 or (counts < 0).any():
        raise ValueError("class counts must be a non-empty nonnegative vector")
    if counts.sum() == 0:
        raise ValueError("all class counts are zero")
    return kernels.entropy_bits(counts)


def numeric_threshold(values: Sequence[float]) -> float:
    """Split threshold for a numeric column: the arithmetic mean."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        raise ValueError("threshold of an empty value sequence")
    return kernels.subset_mean(arr, np.arange(arr.size, dtype=np.int64))


class ConditionalEntropy(NamedTuple):
    value: float
    breakdown: tuple[tuple[str, int, int, float], ...]  # (branch, n0, n1, entropy)


@dataclass(frozen=True)
class SplitCandidate:
    """One scored split: its conditional entropy and information gain."""

    column: str
    kind: str
    threshold: float | None
    conditional_entropy: float
    information_gain: float


@dataclass(frozen=True)
class BestSplit:
    """Winner of a split search plus the full field for tie enumeration."""

    chosen: SplitCandidate
    candidates: tuple[SplitCandidate, ...]
    tie_groups: tuple[tuple[str, ...], ...]  # gain-equivalence classes, best first


@dataclass(frozen=True)
class Leaf:
    label: int
    counts: tuple[int, int]

    @property
    def n(self) -> int:
        return self.counts[0] + self.counts[1]


@dataclass(frozen=True)
class Internal:
    column: str
    kind: str
    threshold: float | None
    gain: float
    counts: tuple[int, int]
    children: dict[str, object]  # category -> node, or {"ge": ..., "lt": ...}

    @property
    def n(self) -> int:
        return self.counts[0] + self.counts[1]


@dataclass(frozen=True)
class DecisionTree:
    root: object
    feature_names: tuple[str, ...]


@dataclass(frozen=True)
class TreeParams:
    max_depth: int | None = None
    min_samples_leaf: int = 1
    feature_subset_size: int | None = None  # None: consider every column
    tie_policy: str = TIE_FIRST
    seed: int = 0


class Prediction(NamedTuple):
    label: int
    class_counts: tuple[int, int]


# ---------------------------------------------------------------------------
# Column preparation
# ---------------------------------------------------------------------------

@dataclass
class _ColumnData:
    name: str
    kind: str
    values: np.ndarray | None = None          # numeric
    codes: np.ndarray | None = None           # categorical, int64
    categories: tuple[str, ...] = ()


def _prepare_columns(table: Table) -> list[_ColumnData]:
    cols = []
    for col in table.schema:
        data = table.column(col.name)
        if col.kind == NUMERIC:
            arr = np.asarray(data, dtype=np.float64)
            if np.isnan(arr).any():
                raise ValidationError(f"column {col.name!r} has missing cells")
            cols.append(_ColumnData(col.name, NUMERIC, values=arr))
        else:
            if any(v is None for v in data):
                raise ValidationError(f"column {col.name!r} has missing cells")
            if col.declared_values:
                categories = tuple(col.declared_values)
            else:
                seen: dict[str, None] = {}
                for v in data:
                    if v not in seen:
                        seen[v] = None
                categories = tuple(seen)
            index = {c: i for i, c in enumerate(categories)}
            codes = np.array([index[v] for v in data], dtype=np.int64)
            cols.append(_ColumnData(col.name, CATEGORICAL, codes=codes, categories=categories))
    return cols


def _as_target(target) -> np.ndarray:
    arr = np.asarray(target)
    if arr.dtype.kind == "f":
        if np.isnan(arr).any():
            raise ValidationError("target has missing cells")
        arr = arr.astype(np.int64)
    else:
        arr = arr.astype(np.int64)
    if arr.size and not np.isin(arr, (0, 1)).all():
        raise ValidationError("target must be binary 0/1")
    return arr


def _score(col: _ColumnData, target: np.ndarray, idx: np.ndarray, parent_entropy: float) -> SplitCandidate:
    if col.kind == CATEGORICAL:
        table = kernels.categorical_counts(col.codes, target, idx, len(col.categories))
        ce = kernels.weighted_entropy_bits(table)
        return SplitCandidate(col.name, CATEGORICAL, None, ce, parent_entropy - ce)
    theta = kernels.subset_mean(col.values, idx)
    counts = kernels.threshold_counts(col.values, target, idx, theta)
    if counts[0].sum() == 0 or counts[1].sum() == 0:
        # degenerate split (one side empty): zero gain, never selected
        return SplitCandidate(col.name, NUMERIC, theta, parent_entropy, 0.0)
    ce = kernels.weighted_entropy_bits(counts)
    return SplitCandidate(col.name, NUMERIC, theta, ce, parent_entropy - ce)


# ---------------------------------------------------------------------------
# Public split-scoring operations
# ---------------------------------------------------------------------------

def conditional_entropy(table: Table, column: str, target, threshold: float | None = None) -> ConditionalEntropy:
    """Size-weighted average entropy of the target after splitting on a column.

    Numeric columns are thresholded at ``threshold`` (node mean by default)
    into {>= theta, < theta} branches.
    """
    if table.n_rows == 0:
        raise ValidationError("conditional entropy of an empty table")
    y = _as_target(target)
    col = next(c for c in _prepare_columns(table.select([column])) if c.name == column)
    idx = np.arange(table.n_rows, dtype=np.int64)
    if col.kind == CATEGORICAL:
        counts = kernels.categorical_counts(col.codes, y, idx, len(col.categories))
        labels = col.categories
    else:
        theta = kernels.subset_mean(col.values, idx) if threshold is None else float(threshold)
        counts = kernels.threshold_counts(col.values, y, idx, theta)
        labels = (f">={theta:g}", f"<{theta:g}")
    value = kernels.weighted_entropy_bits(counts)
    breakdown = tuple(
        (labels[i], int(counts[i, 0]), int(counts[i, 1]), kernels.entropy_bits(counts[i]))
        for i in range(counts.shape[0])
        if counts[i].sum() > 0
    )
    return ConditionalEntropy(value, breakdown)


def information_gain(table: Table, column: str, target) -> SplitCandidate:
    """Gain of splitting the whole table on one column."""
    if table.n_rows == 0:
        raise ValidationError("information gain on an empty table")
    y = _as_target(target)
    col = next(c for c in _prepare_columns(table.select([column])) if c.name == column)
    idx = np.arange(table.n_rows, dtype=np.int64)
    parent = kernels.entropy_bits(kernels.class_counts(y, idx))
    return _score(col, y, idx, parent)


def best_split(
    table: Table,
    target,
    columns: Sequence[str] | None = None,
    tie_policy: str = TIE_FIRST,
    rng: np.random.Generator | None = None,
) -> BestSplit | None:
    """Highest-gain split among the candidate columns.

    Returns None when no candidate has positive gain (the caller makes a
    leaf). Gains within 1e-9 of the maximum tie; the policy picks the first
    in schema order or a random member. ``tie_groups`` holds every
    gain-equivalence class so alternative trees can be enumerated.
    """
    if columns is None:
        columns = table.schema.names
    if not columns:
        raise ConfigError("best_split needs at least one candidate column")
    y = _as_target(target)
    idx = np.arange(table.n_rows, dtype=np.int64)
    parent = kernels.entropy_bits(kernels.class_counts(y, idx))
    cols = {c.name: c for c in _prepare_columns(table.select(list(columns)))}
    scored = tuple(_score(cols[name], y, idx, parent) for name in columns)
    return _pick(scored, tie_policy, rng)


def _pick(scored: tuple[SplitCandidate, ...], tie_policy: str, rng) -> BestSplit | None:
    groups: list[list[SplitCandidate]] = []
    for cand in sorted(scored, key=lambda s: -s.information_gain):
        if groups and groups[-1][0].information_gain - cand.information_gain <= TIE_EPS:
            groups[-1].append(cand)
        else:
            groups.append([cand])
    tie_groups = tuple(tuple(c.column for c in g) for g in groups)
    top = groups[0]
    if top[0].information_gain <= MIN_GAIN:
        return None
    if tie_policy == TIE_FIRST:
        order = {c.column: i for i, c in enumerate(scored)}
        chosen = min(top, key=lambda c: order[c.column])
    elif tie_policy == TIE_RANDOM:
        if rng is None:
            rng = np.random.default_rng()
        chosen = top[int(rng.integers(len(top)))]
    else:
        raise ConfigError(f"unknown tie policy {tie_policy!r}")
    return BestSplit(chosen, scored, tie_groups)


# ---------------------------------------------------------------------------
# Tree construction and prediction
# ---------------------------------------------------------------------------

def build_tree(
    features: Table,
    target,
    params: TreeParams = TreeParams(),
    rng: np.random.Generator | None = None,
) -> DecisionTree:
    """Recursive ID3-style construction over a complete (no-missing) table.

    A node becomes a leaf when it is pure, the depth limit is hit, the
    candidate pool is exhausted, no candidate has positive gain, or the node
    holds fewer than ``min_samples_leaf`` rows. Leaf label ties break toward
    class 0. With ``feature_subset_size`` set, each node scores a fresh
    random candidate subset (forest mode); construction is a pure function
    of (table, params, seed).
    """
    if features.n_rows == 0:
        raise ValidationError("empty training set")
    y = _as_target(target)
    if y.size != features.n_rows:
        raise ValidationError("feature/target row counts differ")
    cols = _prepare_columns(features)
    if rng is None:
        rng = np.random.default_rng(params.seed)
    idx = np.arange(features.n_rows, dtype=np.int64)
    available = frozenset(c.name for c in cols if c.kind == CATEGORICAL)
    root = _grow(cols, y, idx, 0, available, params, rng)
    return DecisionTree(root, features.schema.names)


def _leaf(counts: np.ndarray) -> Leaf:
    label = 0 if counts[0] >= counts[1] else 1
    return Leaf(label, (int(counts[0]), int(counts[1])))


def _grow(cols, y, idx, depth, available_cats, params, rng):
    counts = kernels.class_counts(y, idx)
    if counts[0] == 0 or counts[1] == 0:
        return _leaf(counts)
    if params.max_depth is not None and depth >= params.max_depth:
        return _leaf(counts)
    if idx.size < params.min_samples_leaf:
        return _leaf(counts)
    candidates = [c for c in cols if c.kind == NUMERIC or c.name in available_cats]
    if not candidates:
        return _leaf(counts)
    if params.feature_subset_size is not None and params.feature_subset_size < len(candidates):
        pick = sorted(rng.choice(len(candidates), size=params.feature_subset_size, replace=False).tolist())
        candidates = [candidates[i] for i in pick]
    parent = kernels.entropy_bits(counts)
    scored = tuple(_score(c, y, idx, parent) for c in candidates)
    best = _pick(scored, params.tie_policy, rng)
    if best is None:
        return _leaf(counts)
    chosen = best.chosen
    col = next(c for c in cols if c.name == chosen.column)
    children: dict[str, object] = {}
    if chosen.kind == CATEGORICAL:
        remaining = available_cats - {chosen.column}
        codes_sel = col.codes[idx]
        for code, cat in enumerate(col.categories):
            child_idx = idx[codes_sel == code]
            if child_idx.size:
                children[cat] = _grow(cols, y, child_idx, depth + 1, remaining, params, rng)
    else:
        values_sel = col.values[idx]
        ge = values_sel >= chosen.threshold
        children["ge"] = _grow(cols, y, idx[ge], depth + 1, available_cats, params, rng)
        children["lt"] = _grow(cols, y, idx[~ge], depth + 1, available_cats, params, rng)
    return Internal(
        chosen.column,
        chosen.kind,
        chosen.threshold,
        chosen.information_gain,
        (int(counts[0]), int(counts[1])),
        children,
    )


def predict_tree(tree: DecisionTree, row: dict) -> Prediction:
    """Route a complete row to a leaf; returns its label and class counts.

    Unseen categories at a categorical node follow the child with the most
    training rows.
    """
    node = tree.root
    while isinstance(node, Internal):
        if node.column not in row:
            raise ValidationError(f"row is missing feature {node.column!r}")
        value = row[node.column]
        if node.kind == NUMERIC:
            if value is None or np.isnan(value):
                raise ValidationError(f"row has missing value for feature {node.column!r}")
            node = node.children["ge"] if value >= node.threshold else node.children["lt"]
        else:
            if value is None:
                raise ValidationError(f"row has missing value for feature {node.column!r}")
            child = node.children.get(value)
            if child is None:
                child = max(node.children.values(), key=lambda c: c.n)
            node = child
    return Prediction(node.label, node.counts)


class TreeModel:
    """Thin trainable wrapper with the shared fit/predict_row interface."""

    def __init__(self, params: TreeParams = TreeParams()):
        self.params = params
        self.tree: DecisionTree | None = None

    def fit(self, features: Table, target) -> "TreeModel":
        self.tree = build_tree(features, target, self.params)
        return self

    def predict_row(self, row: dict) -> int:
        return predict_tree(self.tree, row).label


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def _node_doc(node) -> dict:
    if isinstance(node, Leaf):
        return {"leaf": True, "label": node.label, "counts": list(node.counts)}
    return {
        "column": node.column,
        "kind": node.kind,
        "threshold": node.threshold,
        "gain": node.gain,
        "counts": list(node.counts),
        "children": {k: _node_doc(v) for k, v in node.children.items()},
    }


def _node_from_doc(doc) -> object:
    if doc.get("leaf"):
        return Leaf(doc["label"], tuple(doc["counts"]))
    return Internal(
        doc["column"],
        doc["kind"],
        doc["threshold"],
        doc["gain"],
        tuple(doc["counts"]),
        {k: _node_from_doc(v) for k, v in doc["children"].items()},
    )


def tree_to_json(tree: DecisionTree) -> str:
    doc = {"feature_names": list(tree.feature_names), "root": _node_doc(tree.root)}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def tree_from_json(text: str) -> DecisionTree:
    doc = json.loads(text)
    return DecisionTree(_node_from_doc(doc["root"]), tuple(doc["feature_names"]))
