"""Exploratory statistics: per-target distributions and Pearson correlations.

Distributions are emitted as data tables (no plotting). Correlations are
computed on raw, unscaled values with pairwise-present handling of missing
cells; undefined entries (zero variance) are reported as absent, never as 0.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import UndefinedCorrelationError, UnfittableColumnError, WrongKindError
from .tabular import CATEGORICAL, NUMERIC, ROLE_TARGET, Table

MISSING_BUCKET = "(missing)"


@dataclass(frozen=True)
class CategoricalDistribution:
    column: str
    counts: dict[str, tuple[int, int]]  # category -> (count_target0, count_target1)
    missing: tuple[int, int]


@dataclass(frozen=True)
class NumericDistribution:
    column: str
    edges: tuple[float, ...]            # n_bins + 1 edges; last bin closed
    counts: tuple[tuple[int, int], ...]  # per bin (count_target0, count_target1)
    missing: tuple[int, int]


def _as_binary(target) -> np.ndarray:
    y = np.asarray(target, dtype=np.float64).astype(np.int64)
    return y


def categorical_distribution(table: Table, column: str, target) -> CategoricalDistribution:
    """Per-category target counts, with missing cells in their own bucket."""
    col = table.schema.column(column)
    if col.kind != CATEGORICAL:
        raise WrongKindError(f"column {column!r} is not categorical")
    y = _as_binary(target)
    data = table.column(column)
    if col.declared_values:
        order = list(col.declared_values)
    else:
        order = []
        for v in data:
            if v is not None and v not in order:
                order.append(v)
    counts = {c: [0, 0] for c in order}
    missing = [0, 0]
    for v, label in zip(data, y):
        if v is None:
            missing[label] += 1
        else:
            if v not in counts:
                counts[v] = [0, 0]
            counts[v][label] += 1
    return CategoricalDistribution(
        column,
        {c: (n[0], n[1]) for c, n in counts.items()},
        (missing[0], missing[1]),
    )


def numeric_distribution(table: Table, column: str, target, n_bins: int = 10) -> NumericDistribution:
    """Equal-width histogram over [min, max] split by target class.

    The maximum value lands in the last bin; a constant column collapses to
    one degenerate bin holding every row.
    """
    col = table.schema.column(column)
    if col.kind != NUMERIC:
        raise WrongKindError(f"column {column!r} is not numeric")
    if n_bins < 1:
        raise ValueError("n_bins must be >= 1")
    y = _as_binary(target)
    data = np.asarray(table.column(column), dtype=np.float64)
    present = ~np.isnan(data)
    if not present.any():
        raise UnfittableColumnError(f"column {column!r} has no present cells")
    lo = float(data[present].min())
    hi = float(data[present].max())
    missing = [0, 0]
    for label in y[~present]:
        missing[label] += 1
    if lo == hi:
        n1 = int(y[present].sum())
        n0 = int(present.sum()) - n1
        return NumericDistribution(column, (lo, hi), ((n0, n1),), (missing[0], missing[1]))
    width = hi - lo
    edges = tuple(lo + width * i / n_bins for i in range(n_bins + 1))
    counts = [[0, 0] for _ in range(n_bins)]
    for v, label in zip(data[present], y[present]):
        b = int((v - lo) / width * n_bins)
        if b >= n_bins:
            b = n_bins - 1
        counts[b][label] += 1
    return NumericDistribution(
        column, edges, tuple((c[0], c[1]) for c in counts), (missing[0], missing[1])
    )


def pearson(x, y) -> float:
    """Pearson product-moment correlation of two equal-length sequences."""
    a = np.asarray(x, dtype=np.float64)
    b = np.asarray(y, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("pearson needs two equal-length 1-d sequences")
    if a.size < 2:
        raise ValueError("pearson needs at least 2 points")
    da = a - a.mean()
    db = b - b.mean()
    sa = float(np.sqrt((da * da).sum()))
    sb = float(np.sqrt((db * db).sum()))
    if sa == 0.0 or sb == 0.0:
        raise UndefinedCorrelationError("zero variance sequence")
    r = float((da * db).sum()) / (sa * sb)
    return max(-1.0, min(1.0, r))


@dataclass(frozen=True)
class CorrelationMatrix:
    labels: tuple[str, ...]
    values: np.ndarray  # symmetric; NaN marks an undefined (absent) entry

    def get(self, a: str, b: str) -> float | None:
        i, j = self.labels.index(a), self.labels.index(b)
        v = float(self.values[i, j])
        return None if np.isnan(v) else v


def correlation_matrix(table: Table, columns=None) -> CorrelationMatrix:
    """Pairwise Pearson correlations over the numeric columns.

    Missing cells are excluded pairwise: a pair of columns is correlated
    over the rows where both are present. Undefined entries stay NaN.
    """
    if columns is None:
        columns = [c.name for c in table.schema if c.kind == NUMERIC]
    data = {name: np.asarray(table.column(name), dtype=np.float64) for name in columns}
    n = len(columns)
    values = np.full((n, n), np.nan)
    for i in range(n):
        for j in range(i, n):
            a, b = data[columns[i]], data[columns[j]]
            both = ~np.isnan(a) & ~np.isnan(b)
            try:
                r = pearson(a[both], b[both])
            except (ValueError, UndefinedCorrelationError):
                continue
            values[i, j] = values[j, i] = r
    values.setflags(write=False)
    return CorrelationMatrix(tuple(columns), values)


# ---------------------------------------------------------------------------
# Report serialization
# ---------------------------------------------------------------------------

def distribution_to_csv(dist) -> str:
    """CSV rendering of a distribution; one row per bucket plus the missing row."""
    lines = []
    if isinstance(dist, CategoricalDistribution):
        lines.append("category,target0,target1")
        for cat, (n0, n1) in dist.counts.items():
            lines.append(f"{cat},{n0},{n1}")
        lines.append(f"{MISSING_BUCKET},{dist.missing[0]},{dist.missing[1]}")
    else:
        lines.append("bin_low,bin_high,target0,target1")
        if len(dist.edges) == 2 and dist.edges[0] == dist.edges[1]:
            n0, n1 = dist.counts[0]
            lines.append(f"{dist.edges[0]!r},{dist.edges[1]!r},{n0},{n1}")
        else:
            for b, (n0, n1) in enumerate(dist.counts):
                lines.append(f"{dist.edges[b]!r},{dist.edges[b + 1]!r},{n0},{n1}")
        lines.append(f"{MISSING_BUCKET},,{dist.missing[0]},{dist.missing[1]}")
    return "\n".join(lines) + "\n"


def correlation_to_json(matrix: CorrelationMatrix) -> str:
    """JSON document with the full matrix plus the target row pulled out."""
    def cell(v):
        return None if np.isnan(v) else float(v)

    doc = {
        "labels": list(matrix.labels),
        "matrix": [[cell(v) for v in row] for row in matrix.values],
    }
    if "target" in matrix.labels:
        t = matrix.labels.index("target")
        doc["target_row"] = {
            label: cell(matrix.values[t, i]) for i, label in enumerate(matrix.labels)
        }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def distribution_report(table: Table, n_bins: int = 10) -> dict[str, object]:
    """One distribution per feature column, keyed by column name."""
    target_col = table.schema.target
    y = np.asarray(table.column(target_col.name), dtype=np.float64).astype(np.int64)
    report: dict[str, object] = {}
    for col in table.schema:
        if col.role == ROLE_TARGET:
            continue
        if col.kind == CATEGORICAL:
            report[col.name] = categorical_distribution(table, col.name, y)
        else:
            report[col.name] = numeric_distribution(table, col.name, y, n_bins)
    return report
