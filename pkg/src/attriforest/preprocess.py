"""Fitted, replayable transforms: imputation, encoding, and max-abs scaling.

The pipeline order is impute (median for numeric, mode for categorical),
then encode (label maps for small category sets, one-hot above a threshold),
then scale every numeric column by its maximum absolute value. A
FittedPreprocessor captures all learned state and replays it on unseen rows;
it serializes to JSON with explicit category order.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import (
    ConfigError,
    CoverageError,
    UnfittableColumnError,
    UnseenCategoryError,
    ValidationError,
    WrongKindError,
)
from .tabular import (
    CATEGORICAL,
    NUMERIC,
    ROLE_IDENTIFIER,
    ColumnSchema,
    Table,
    TableSchema,
)

POLICY_ALPHABETICAL = "alphabetical"
POLICY_SCHEMA_ORDER = "schema_order"

LABEL = "label"
ONE_HOT = "one_hot"

DEFAULT_ONE_HOT_THRESHOLD = 5


# ---------------------------------------------------------------------------
# Imputation
# ---------------------------------------------------------------------------

def fit_impute(table: Table) -> dict[str, object]:
    """Learn per-column fill values: median (numeric) or mode (categorical).

    Even-count medians average the two middle values; mode ties break toward
    the lexicographically smallest category.
    """
    stats: dict[str, object] = {}
    for col in table.schema:
        data = table.column(col.name)
        if col.kind == NUMERIC:
            present = data[~np.isnan(data)]
            if present.size == 0:
                raise UnfittableColumnError(f"column {col.name!r} has no present cells")
            stats[col.name] = float(np.median(present))
        else:
            counts = Counter(v for v in data if v is not None)
            if not counts:
                raise UnfittableColumnError(f"column {col.name!r} has no present cells")
            stats[col.name] = min(counts, key=lambda v: (-counts[v], v))
    return stats


def apply_impute(table: Table, stats: Mapping[str, object]) -> Table:
    """Fill every missing cell from the fitted statistics."""
    cols: dict[str, object] = {}
    for col in table.schema:
        if col.name not in stats:
            raise CoverageError(f"no imputation statistic for column {col.name!r}")
        data = table.column(col.name)
        fill = stats[col.name]
        if col.kind == NUMERIC:
            out = np.asarray(data, dtype=np.float64).copy()
            out[np.isnan(out)] = float(fill)
            cols[col.name] = out
        else:
            cols[col.name] = tuple(fill if v is None else v for v in data)
    return Table(table.schema, cols, table.n_rows)


# ---------------------------------------------------------------------------
# Encoding
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EncodingMap:
    """Bijective category -> code assignment for one column."""

    kind: str
    order_policy: str
    categories: tuple[str, ...]

    @property
    def codes(self) -> dict[str, int]:
        return {c: i for i, c in enumerate(self.categories)}

    def code_of(self, value: str) -> int:
        try:
            return self.codes[value]
        except KeyError:
            raise UnseenCategoryError(f"category {value!r} not in encoding map") from None

    def decode(self, code: int) -> str:
        return self.categories[code]


def fit_encoding(
    table: Table,
    column: str,
    policy: str = POLICY_ALPHABETICAL,
    one_hot_threshold: int = DEFAULT_ONE_HOT_THRESHOLD,
) -> EncodingMap:
    """Build an EncodingMap for a categorical column.

    Categories come from the schema's declared values when present (keeping
    codes stable across resamples), otherwise from the observed values. At
    most ``one_hot_threshold`` categories get a label map; more go one-hot.
    """
    col = table.schema.column(column)
    if col.kind != CATEGORICAL:
        raise WrongKindError(f"column {column!r} is not categorical")
    if col.declared_values:
        categories = list(col.declared_values)
    else:
        seen: dict[str, None] = {}
        for v in table.column(column):
            if v is not None and v not in seen:
                seen[v] = None
        categories = list(seen)
    if not categories:
        raise UnfittableColumnError(f"column {column!r} has no categories")
    if policy == POLICY_ALPHABETICAL:
        categories.sort()
    elif policy != POLICY_SCHEMA_ORDER:
        raise ConfigError(f"unknown order policy {policy!r}")
    kind = LABEL if len(categories) <= one_hot_threshold else ONE_HOT
    return EncodingMap(kind, policy, tuple(categories))


def apply_encoding(table: Table, maps: Mapping[str, EncodingMap]) -> Table:
    """Replace categorical columns by their numeric encodings.

    Label columns become integer codes; one-hot columns expand into one
    indicator column per category, named ``<col>=<category>``. Numeric
    columns pass through. The input must have no missing cells.
    """
    out_schemas: list[ColumnSchema] = []
    cols: dict[str, object] = {}
    for col in table.schema:
        data = table.column(col.name)
        if col.kind == NUMERIC:
            out_schemas.append(col)
            cols[col.name] = data
            continue
        if col.name not in maps:
            raise CoverageError(f"no encoding map for column {col.name!r}")
        if any(v is None for v in data):
            raise ValidationError(f"column {col.name!r} has missing cells; impute first")
        emap = maps[col.name]
        codes = np.array([emap.code_of(v) for v in data], dtype=np.float64)
        if emap.kind == LABEL:
            out_schemas.append(ColumnSchema(col.name, NUMERIC, role=col.role))
            cols[col.name] = codes
        else:
            for j, cat in enumerate(emap.categories):
                name = f"{col.name}={cat}"
                out_schemas.append(ColumnSchema(name, NUMERIC, role=col.role))
                cols[name] = (codes == j).astype(np.float64)
    return Table(TableSchema(tuple(out_schemas)), cols, table.n_rows)


# ---------------------------------------------------------------------------
# Scaling
# ---------------------------------------------------------------------------

def fit_scale(table: Table) -> dict[str, float]:
    """Per-column maximum absolute value; all-zero columns record factor 1."""
    factors: dict[str, float] = {}
    for col in table.schema:
        if col.kind != NUMERIC:
            raise WrongKindError(f"column {col.name!r} is not numeric; encode first")
        m = float(np.max(np.abs(table.column(col.name)))) if table.n_rows else 0.0
        factors[col.name] = m if m > 0.0 else 1.0
    return factors


def apply_scale(table: Table, factors: Mapping[str, float]) -> Table:
    """Divide each column by its fitted max-abs factor."""
    cols: dict[str, object] = {}
    for col in table.schema:
        if col.name not in factors:
            raise CoverageError(f"no scale factor for column {col.name!r}")
        cols[col.name] = np.asarray(table.column(col.name), dtype=np.float64) / factors[col.name]
    return Table(table.schema, cols, table.n_rows)


# ---------------------------------------------------------------------------
# Fitted pipeline state
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FittedPreprocessor:
    """All learned preprocessing state, replayable on unseen rows.

    Identifier-role columns are dropped up front (models never see them);
    every surviving column has an imputation statistic, every categorical
    one an encoding map, and every post-encoding column a scale factor.
    """

    dropped: tuple[str, ...]
    impute_stats: dict[str, object]
    encoding_maps: dict[str, EncodingMap]
    scale_factors: dict[str, float]
    input_schema: TableSchema
    output_schema: TableSchema

    @classmethod
    def fit(
        cls,
        table: Table,
        policy: str = POLICY_ALPHABETICAL,
        one_hot_threshold: int = DEFAULT_ONE_HOT_THRESHOLD,
    ) -> "FittedPreprocessor":
        return cls.fit_transform(table, policy, one_hot_threshold)[0]

    @classmethod
    def fit_transform(
        cls,
        table: Table,
        policy: str = POLICY_ALPHABETICAL,
        one_hot_threshold: int = DEFAULT_ONE_HOT_THRESHOLD,
        stage_log: list | None = None,
    ) -> tuple["FittedPreprocessor", Table]:
        """Fit all stages in pipeline order and return the transformed table.

        ``stage_log`` (when given) records the stage names as they execute.
        """
        log = stage_log if stage_log is not None else []
        dropped = tuple(c.name for c in table.schema if c.role == ROLE_IDENTIFIER)
        kept = [c.name for c in table.schema if c.role != ROLE_IDENTIFIER]
        working = table.select(kept)
        log.append("impute")
        stats = fit_impute(working)
        working = apply_impute(working, stats)
        log.append("encode")
        maps = {
            c.name: fit_encoding(working, c.name, policy, one_hot_threshold)
            for c in working.schema
            if c.kind == CATEGORICAL
        }
        encoded = apply_encoding(working, maps)
        log.append("scale")
        factors = fit_scale(encoded)
        scaled = apply_scale(encoded, factors)
        fitted = cls(dropped, stats, maps, factors, working.schema, encoded.schema)
        return fitted, scaled

    def transform(self, table: Table) -> Table:
        kept = [c.name for c in table.schema if c.name not in self.dropped]
        working = table.select(kept)
        working = apply_impute(working, self.impute_stats)
        encoded = apply_encoding(working, self.encoding_maps)
        needed = {c.name: self.scale_factors[c.name] for c in encoded.schema if c.name in self.scale_factors}
        if len(needed) != len(encoded.schema.names):
            missing = [n for n in encoded.schema.names if n not in self.scale_factors]
            raise CoverageError(f"no scale factor for columns {missing}")
        return apply_scale(encoded, needed)

    def to_json(self) -> str:
        doc = {
            "dropped": list(self.dropped),
            "impute": {
                name: {"fill": fill} for name, fill in self.impute_stats.items()
            },
            "encodings": {
                name: {
                    "kind": m.kind,
                    "order_policy": m.order_policy,
                    "categories": list(m.categories),
                }
                for name, m in self.encoding_maps.items()
            },
            "scale": dict(self.scale_factors),
            "input_schema": _schema_doc(self.input_schema),
            "output_schema": _schema_doc(self.output_schema),
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "FittedPreprocessor":
        doc = json.loads(text)
        return cls(
            dropped=tuple(doc["dropped"]),
            impute_stats={k: v["fill"] for k, v in doc["impute"].items()},
            encoding_maps={
                k: EncodingMap(v["kind"], v["order_policy"], tuple(v["categories"]))
                for k, v in doc["encodings"].items()
            },
            scale_factors={k: float(v) for k, v in doc["scale"].items()},
            input_schema=_schema_from_doc(doc["input_schema"]),
            output_schema=_schema_from_doc(doc["output_schema"]),
        )


def _schema_doc(schema: TableSchema) -> list[dict]:
    return [
        {
            "name": c.name,
            "kind": c.kind,
            "role": c.role,
            "values": list(c.declared_values),
            "aliases": list(c.aliases),
        }
        for c in schema
    ]


def _schema_from_doc(doc: list[dict]) -> TableSchema:
    return TableSchema(
        tuple(
            ColumnSchema(
                d["name"], d["kind"], tuple(d["values"]), d["role"], tuple(d["aliases"])
            )
            for d in doc
        )
    )
