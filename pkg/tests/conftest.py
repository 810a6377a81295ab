import numpy as np
import pytest
from hypothesis import settings

from attriforest.tabular import CATEGORICAL, NUMERIC, ColumnSchema, Table, TableSchema

settings.register_profile("default", deadline=None)
settings.load_profile("default")


def build_table(spec, data, n_rows=None):
    """Convenience Table constructor.

    ``spec`` is a list of (name, kind) or (name, kind, declared_values) or
    (name, kind, declared_values, role) tuples.
    """
    cols = []
    for entry in spec:
        name, kind = entry[0], entry[1]
        declared = tuple(entry[2]) if len(entry) > 2 else ()
        role = entry[3] if len(entry) > 3 else "feature"
        cols.append(ColumnSchema(name, kind, declared, role))
    schema = TableSchema(tuple(cols))
    if n_rows is None:
        n_rows = len(next(iter(data.values())))
    return Table(schema, data, n_rows)


def worked_example():
    """The 8-row sample dataset used throughout the hand-worked tests."""
    return build_table(
        [
            ("City_deve", NUMERIC),
            (
                "relevent_experience",
                CATEGORICAL,
                ("Has relevent experience", "No relevent experience"),
            ),
            (
                "enrolled_university",
                CATEGORICAL,
                ("no_enrollment", "Full time course", "Part time course"),
            ),
            ("target", NUMERIC, (), "target"),
        ],
        {
            "City_deve": [0.92, 0.776, 0.624, 0.789, 0.767, 0.764, 0.92, 0.92],
            "relevent_experience": [
                "Has relevent experience",
                "No relevent experience",
                "No relevent experience",
                "No relevent experience",
                "Has relevent experience",
                "Has relevent experience",
                "Has relevent experience",
                "Has relevent experience",
            ],
            "enrolled_university": [
                "no_enrollment",
                "no_enrollment",
                "Full time course",
                "Full time course",
                "no_enrollment",
                "Part time course",
                "no_enrollment",
                "no_enrollment",
            ],
            "target": [1, 0, 0, 1, 0, 1, 0, 1],
        },
    )


@pytest.fixture
def sample8():
    return worked_example()


def random_small_table(rng, n_rows=None, n_cols=None, with_unique_key=False):
    """Random mixed-kind table plus binary target for property tests.

    With ``with_unique_key`` a categorical column with one distinct value per
    row is included, which guarantees a positive-gain split exists at every
    impure node (so ID3 fully separates the data).
    """
    if n_rows is None:
        n_rows = int(rng.integers(2, 7))
    if n_cols is None:
        n_cols = int(rng.integers(1, 4))
    spec = []
    data = {}
    for j in range(n_cols):
        name = f"c{j}"
        if rng.integers(2) == 0:
            spec.append((name, NUMERIC))
            data[name] = rng.integers(0, 3, size=n_rows).astype(float)
        else:
            spec.append((name, CATEGORICAL))
            data[name] = [f"v{v}" for v in rng.integers(0, 2, size=n_rows)]
    if with_unique_key:
        spec.append(("key", CATEGORICAL))
        data["key"] = [f"k{i}" for i in range(n_rows)]
    target = rng.integers(0, 2, size=n_rows).astype(np.int64)
    return build_table(spec, data), target
