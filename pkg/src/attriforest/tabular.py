"""Schema-typed, column-major tables for heterogeneous tabular data.

A Table stores numeric columns as float64 arrays (NaN marks a missing cell)
and categorical columns as tuples of ``str | None`` (None marks a missing
cell). Tables are immutable after construction and safe to share.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import ParseError, SchemaError, ValidationError

NUMERIC = "numeric"
CATEGORICAL = "categorical"

ROLE_FEATURE = "feature"
ROLE_IDENTIFIER = "identifier"
ROLE_TARGET = "target"

DEFAULT_NULL_TOKENS = ("", "NaN")


@dataclass(frozen=True)
class ColumnSchema:
    """Declared name, kind, allowed categories, and modeling role of a column."""

    name: str
    kind: str
    declared_values: tuple[str, ...] = ()
    role: str = ROLE_FEATURE
    aliases: tuple[str, ...] = ()

    def __post_init__(self):
        if self.kind not in (NUMERIC, CATEGORICAL):
            raise SchemaError(f"column {self.name!r}: unknown kind {self.kind!r}")
        if self.role not in (ROLE_FEATURE, ROLE_IDENTIFIER, ROLE_TARGET):
            raise SchemaError(f"column {self.name!r}: unknown role {self.role!r}")
        if self.kind == NUMERIC and self.declared_values:
            raise SchemaError(f"numeric column {self.name!r} must not declare values")
        if len(set(self.declared_values)) != len(self.declared_values):
            raise SchemaError(f"column {self.name!r}: duplicate declared values")


@dataclass(frozen=True)
class TableSchema:
    """Ordered collection of column schemas with exactly one target column."""

    columns: tuple[ColumnSchema, ...]

    def __post_init__(self):
        names = [c.name for c in self.columns]
        if len(set(names)) != len(names):
            raise SchemaError("duplicate column names in schema")
        targets = [c.name for c in self.columns if c.role == ROLE_TARGET]
        if len(targets) > 1:
            raise SchemaError(f"schema must declare at most one target column, got {targets}")

    def __iter__(self):
        return iter(self.columns)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.columns)

    @property
    def target(self) -> ColumnSchema:
        for c in self.columns:
            if c.role == ROLE_TARGET:
                return c
        raise SchemaError("schema declares no target column")

    def column(self, name: str) -> ColumnSchema:
        for c in self.columns:
            if c.name == name:
                return c
        raise SchemaError(f"no column named {name!r} in schema")

    def feature_columns(self) -> tuple[ColumnSchema, ...]:
        return tuple(c for c in self.columns if c.role == ROLE_FEATURE)

    def resolve_header(self, header: Sequence[str]) -> dict[str, str]:
        """Map CSV header names to schema names, honoring declared aliases.

        Raises SchemaError listing missing and extra columns when the header
        does not cover the schema exactly.
        """
        lookup: dict[str, str] = {}
        for col in self.columns:
            lookup[col.name] = col.name
            for alias in col.aliases:
                lookup[alias] = col.name
        mapping: dict[str, str] = {}
        extra = []
        for h in header:
            if h in lookup:
                mapping[h] = lookup[h]
            else:
                extra.append(h)
        seen = set(mapping.values())
        missing = [c.name for c in self.columns if c.name not in seen]
        if missing or extra:
            raise SchemaError(
                f"header/schema mismatch: missing columns {missing}, extra columns {extra}"
            )
        return mapping


class Table:
    """Immutable column-major dataset with explicit missing-value markers."""

    def __init__(self, schema: TableSchema, columns: dict[str, object], n_rows: int):
        self.schema = schema
        self.n_rows = n_rows
        store: dict[str, object] = {}
        for col in schema:
            if col.name not in columns:
                raise SchemaError(f"column {col.name!r} absent from data")
            data = columns[col.name]
            if col.kind == NUMERIC:
                arr = np.asarray(data, dtype=np.float64)
                if arr.shape != (n_rows,):
                    raise SchemaError(f"column {col.name!r} has {arr.size} cells, expected {n_rows}")
                arr = arr.copy()
                arr.setflags(write=False)
                store[col.name] = arr
            else:
                cells = tuple(data)
                if len(cells) != n_rows:
                    raise SchemaError(f"column {col.name!r} has {len(cells)} cells, expected {n_rows}")
                if col.declared_values:
                    allowed = set(col.declared_values)
                    for i, v in enumerate(cells):
                        if v is not None and v not in allowed:
                            raise ValidationError(
                                f"row {i}, column {col.name!r}: value {v!r} outside declared values"
                            )
                store[col.name] = cells
        self._columns = store

    def column(self, name: str):
        """Raw column storage: float64 array (numeric) or tuple of str/None."""
        try:
            return self._columns[name]
        except KeyError:
            raise SchemaError(f"no column named {name!r}") from None

    def missing_mask(self, name: str) -> np.ndarray:
        col = self.column(name)
        if self.schema.column(name).kind == NUMERIC:
            return np.isnan(col)
        return np.array([v is None for v in col], dtype=bool)

    def row(self, i: int) -> dict[str, object]:
        """Row as a name -> value mapping (NaN / None for missing cells)."""
        out = {}
        for col in self.schema:
            v = self._columns[col.name][i]
            out[col.name] = float(v) if col.kind == NUMERIC else v
        return out

    def take(self, indices) -> "Table":
        """New Table containing the given rows (duplicates allowed)."""
        idx = np.asarray(indices, dtype=np.int64)
        cols: dict[str, object] = {}
        for col in self.schema:
            data = self._columns[col.name]
            if col.kind == NUMERIC:
                cols[col.name] = data[idx]
            else:
                cols[col.name] = tuple(data[i] for i in idx)
        return Table(self.schema, cols, int(idx.size))

    def select(self, names: Sequence[str], schema: TableSchema | None = None) -> "Table":
        """New Table restricted to the named columns."""
        if schema is None:
            schema = TableSchema(tuple(self.schema.column(n) for n in names))
        return Table(schema, {n: self._columns[n] for n in names}, self.n_rows)

    def __eq__(self, other):
        if not isinstance(other, Table):
            return NotImplemented
        if self.schema != other.schema or self.n_rows != other.n_rows:
            return False
        for col in self.schema:
            a, b = self._columns[col.name], other._columns[col.name]
            if col.kind == NUMERIC:
                if not np.array_equal(a, b, equal_nan=True):
                    return False
            elif a != b:
                return False
        return True


def load_csv(
    path,
    schema: TableSchema,
    null_tokens: Iterable[str] = DEFAULT_NULL_TOKENS,
    lenient: bool = False,
) -> Table:
    """Load a CSV file under an explicit schema.

    Null tokens become missing cells. A categorical value outside the
    declared set raises ValidationError, or becomes missing under ``lenient``.
    """
    nulls = set(null_tokens)
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file, header row required") from None
        mapping = schema.resolve_header(header)
        positions = {mapping[h]: j for j, h in enumerate(header)}
        raw: dict[str, list] = {c.name: [] for c in schema}
        n_rows = 0
        for i, rec in enumerate(reader):
            if len(rec) != len(header):
                raise ParseError(f"row {i}: expected {len(header)} fields, got {len(rec)}")
            for col in schema:
                token = rec[positions[col.name]]
                if token in nulls:
                    raw[col.name].append(math.nan if col.kind == NUMERIC else None)
                    continue
                if col.kind == NUMERIC:
                    try:
                        raw[col.name].append(float(token))
                    except ValueError:
                        raise ParseError(
                            f"row {i}, column {col.name!r}: cannot parse {token!r} as a number"
                        ) from None
                else:
                    if col.declared_values and token not in col.declared_values:
                        if lenient:
                            raw[col.name].append(None)
                            continue
                        raise ValidationError(
                            f"row {i}, column {col.name!r}: value {token!r} outside declared values"
                        )
                    raw[col.name].append(token)
            n_rows += 1
    return Table(schema, raw, n_rows)


def write_csv(table: Table, path) -> None:
    """Serialize a Table to CSV; missing cells become empty fields.

    Numeric cells use repr so a reload under the same schema is
    cell-identical.
    """
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(table.schema.names)
        for i in range(table.n_rows):
            rec = []
            for col in table.schema:
                v = table.column(col.name)[i]
                if col.kind == NUMERIC:
                    rec.append("" if math.isnan(v) else repr(float(v)))
                else:
                    rec.append("" if v is None else v)
            writer.writerow(rec)


def missing_counts(table: Table) -> dict[str, int]:
    """Per-column count of missing cells."""
    return {c.name: int(table.missing_mask(c.name).sum()) for c in table.schema}


def split_columns(table: Table) -> tuple[Table, np.ndarray]:
    """Separate features from the 0/1 target, dropping identifier columns."""
    target_col = table.schema.target
    mask = table.missing_mask(target_col.name)
    if mask.any():
        raise ValidationError(f"missing target cell at row {int(np.argmax(mask))}")
    values = np.asarray(table.column(target_col.name), dtype=np.float64)
    if not np.isin(values, (0.0, 1.0)).all():
        bad = int(np.argmax(~np.isin(values, (0.0, 1.0))))
        raise ValidationError(f"row {bad}: target value {values[bad]} not in {{0, 1}}")
    target = values.astype(np.int64)
    features = tuple(c.name for c in table.schema.feature_columns())
    schema = TableSchema(tuple(table.schema.column(n) for n in features))
    return table.select(features, schema), target


# ---------------------------------------------------------------------------
# Schema documents
# ---------------------------------------------------------------------------
#
# A schema file is a flat key=value document, one block per column separated
# by blank lines. Example:
#
#   name=gender
#   kind=categorical
#   role=feature
#   values=Male|Female|Other
#   aliases=Gender
#
# "values" and "aliases" are optional, pipe-separated lists.

def parse_schema(text: str) -> TableSchema:
    blocks: list[dict[str, str]] = []
    current: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            if not line and current:
                blocks.append(current)
                current = {}
            continue
        if "=" not in line:
            raise SchemaError(f"schema line {lineno}: expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        current[key.strip()] = value.strip()
    if current:
        blocks.append(current)
    columns = []
    for block in blocks:
        if "name" not in block:
            raise SchemaError(f"schema block missing 'name': {block}")
        columns.append(
            ColumnSchema(
                name=block["name"],
                kind=block.get("kind", CATEGORICAL),
                declared_values=tuple(v for v in block.get("values", "").split("|") if v),
                role=block.get("role", ROLE_FEATURE),
                aliases=tuple(a for a in block.get("aliases", "").split("|") if a),
            )
        )
    return TableSchema(tuple(columns))


def load_schema(path) -> TableSchema:
    return parse_schema(Path(path).read_text(encoding="utf-8"))


def format_schema(schema: TableSchema) -> str:
    blocks = []
    for col in schema:
        lines = [f"name={col.name}", f"kind={col.kind}", f"role={col.role}"]
        if col.declared_values:
            lines.append("values=" + "|".join(col.declared_values))
        if col.aliases:
            lines.append("aliases=" + "|".join(col.aliases))
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"


def hr_schema() -> TableSchema:
    """Schema of the HR job-change dataset (canonical Kaggle column names).

    Bounded category sets are declared explicitly; open-ended ones (city
    codes, experience bands, company sizes) are left unconstrained. Aliases
    absorb the alternate spellings seen in the wild (c_size, Lastnewjob, ...).
    """
    return TableSchema(
        (
            ColumnSchema("enrollee_id", NUMERIC, role=ROLE_IDENTIFIER),
            ColumnSchema("city", CATEGORICAL, role=ROLE_IDENTIFIER, aliases=("City",)),
            ColumnSchema(
                "city_development_index",
                NUMERIC,
                aliases=("citydevelopmentindex", "City_deve"),
            ),
            ColumnSchema(
                "gender", CATEGORICAL, ("Male", "Female", "Other"), aliases=("Gender",)
            ),
            ColumnSchema(
                "relevent_experience",
                CATEGORICAL,
                ("Has relevent experience", "No relevent experience"),
            ),
            ColumnSchema(
                "enrolled_university",
                CATEGORICAL,
                ("no_enrollment", "Full time course", "Part time course"),
                aliases=("enrol_university",),
            ),
            ColumnSchema(
                "education_level",
                CATEGORICAL,
                ("Primary School", "Graduate", "Masters", "High School", "Phd"),
            ),
            ColumnSchema(
                "major_discipline",
                CATEGORICAL,
                ("STEM", "Business Degree", "Arts", "Humanities", "No Major", "Other"),
            ),
            ColumnSchema("experience", CATEGORICAL, aliases=("Experience",)),
            ColumnSchema("company_size", CATEGORICAL, aliases=("c_size",)),
            ColumnSchema("company_type", CATEGORICAL),
            ColumnSchema("last_new_job", CATEGORICAL, aliases=("Lastnewjob",)),
            ColumnSchema("training_hours", NUMERIC),
            ColumnSchema("target", NUMERIC, role=ROLE_TARGET, aliases=("Target",)),
        )
    )
