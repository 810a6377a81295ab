import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from attriforest.errors import (
    CoverageError,
    UnfittableColumnError,
    UnseenCategoryError,
    ValidationError,
)
from attriforest.preprocess import (
    LABEL,
    ONE_HOT,
    POLICY_ALPHABETICAL,
    POLICY_SCHEMA_ORDER,
    EncodingMap,
    FittedPreprocessor,
    apply_encoding,
    apply_impute,
    apply_scale,
    fit_encoding,
    fit_impute,
    fit_scale,
)
from attriforest.tabular import CATEGORICAL, NUMERIC

from conftest import build_table, worked_example


def numeric_table(values):
    return build_table([("x", NUMERIC)], {"x": values})


def categorical_table(cells, declared=()):
    return build_table([("c", CATEGORICAL, declared)], {"c": cells})


class TestImpute:
    def test_median_odd(self):
        assert fit_impute(numeric_table([1, 3, 5]))["x"] == 3

    def test_median_even_averages_middle_pair(self):
        assert fit_impute(numeric_table([1, 2, 3, 10]))["x"] == 2.5

    def test_mode(self):
        assert fit_impute(categorical_table(["a", "b", "b", None]))["c"] == "b"

    def test_mode_tie_breaks_lexicographically(self):
        assert fit_impute(categorical_table(["b", "b", "a", "a"]))["c"] == "a"

    def test_all_missing_column_is_unfittable(self):
        with pytest.raises(UnfittableColumnError, match="'x'"):
            fit_impute(numeric_table([np.nan, np.nan]))

    def test_apply_fills_every_hole(self):
        table = numeric_table([1, np.nan, 5])
        out = apply_impute(table, {"x": 3.0})
        assert list(out.column("x")) == [1, 3, 5]

    def test_apply_on_complete_table_is_identity(self, sample8):
        stats = fit_impute(sample8)
        assert apply_impute(sample8, stats) == sample8

    def test_missing_stat_is_coverage_error(self):
        with pytest.raises(CoverageError):
            apply_impute(numeric_table([1.0]), {})

    def test_fit_then_apply_leaves_no_missing(self):
        table = build_table(
            [("x", NUMERIC), ("c", CATEGORICAL)],
            {"x": [1, np.nan, 3], "c": ["a", "a", None]},
        )
        out = apply_impute(table, fit_impute(table))
        assert not out.missing_mask("x").any()
        assert not out.missing_mask("c").any()
        # present cells unchanged
        assert out.column("x")[0] == 1 and out.column("c")[0] == "a"


class TestEncoding:
    def test_label_map_table3_schema_order(self):
        declared = ("STEM", "Business Degree", "Arts", "Humanities", "No Major", "Other")
        table = categorical_table(list(declared), declared)
        emap = fit_encoding(table, "c", POLICY_SCHEMA_ORDER, one_hot_threshold=6)
        assert emap.kind == LABEL
        assert emap.codes == {
            "STEM": 0,
            "Business Degree": 1,
            "Arts": 2,
            "Humanities": 3,
            "No Major": 4,
            "Other": 5,
        }

    def test_alphabetical_policy(self):
        table = categorical_table(["Arts", "STEM", "Business Degree"])
        emap = fit_encoding(table, "c", POLICY_ALPHABETICAL)
        assert emap.codes == {"Arts": 0, "Business Degree": 1, "STEM": 2}

    def test_single_category(self):
        emap = fit_encoding(categorical_table(["only", "only"]), "c")
        assert emap.kind == LABEL and emap.codes == {"only": 0}

    def test_dispatch_to_one_hot_above_threshold(self):
        cells = [f"v{i}" for i in range(6)]
        emap = fit_encoding(categorical_table(cells), "c", one_hot_threshold=5)
        assert emap.kind == ONE_HOT

    def test_label_codes_are_dense(self):
        rng = np.random.default_rng(5)
        for _ in range(30):
            k = int(rng.integers(1, 6))
            cells = [f"v{rng.integers(k)}" for _ in range(10)] + [f"v{i}" for i in range(k)]
            emap = fit_encoding(categorical_table(cells), "c", one_hot_threshold=10)
            assert sorted(emap.codes.values()) == list(range(len(emap.categories)))

    def test_encoding_bijective(self):
        emap = fit_encoding(categorical_table(["a", "c", "b"]), "c")
        for cat in emap.categories:
            assert emap.decode(emap.code_of(cat)) == cat

    def test_apply_label_codes(self):
        declared = ("STEM", "Business Degree", "Arts", "Humanities", "No Major", "Other")
        table = categorical_table(["Humanities"], declared)
        emap = fit_encoding(table, "c", POLICY_SCHEMA_ORDER, one_hot_threshold=6)
        out = apply_encoding(table, {"c": emap})
        assert out.column("c")[0] == 3
        assert out.schema.column("c").kind == NUMERIC

    def test_apply_one_hot_indicators(self):
        table = categorical_table(["a"], ("a", "b"))
        emap = EncodingMap(ONE_HOT, POLICY_SCHEMA_ORDER, ("a", "b"))
        out = apply_encoding(table, {"c": emap})
        assert out.schema.names == ("c=a", "c=b")
        assert list(out.column("c=a")) == [1] and list(out.column("c=b")) == [0]

    def test_one_hot_blocks_sum_to_one(self):
        table = categorical_table(["x", "z", "y"], ("x", "y", "z"))
        emap = EncodingMap(ONE_HOT, POLICY_SCHEMA_ORDER, ("x", "y", "z"))
        out = apply_encoding(table, {"c": emap})
        block = np.column_stack([out.column(f"c={c}") for c in ("x", "y", "z")])
        assert (block.sum(axis=1) == 1).all()
        assert set(block.ravel()) <= {0.0, 1.0}

    def test_unseen_category_rejected(self):
        emap = EncodingMap(LABEL, POLICY_ALPHABETICAL, ("a",))
        with pytest.raises(UnseenCategoryError, match="'b'"):
            apply_encoding(categorical_table(["b"]), {"c": emap})

    def test_missing_cells_rejected(self):
        emap = EncodingMap(LABEL, POLICY_ALPHABETICAL, ("a",))
        with pytest.raises(ValidationError):
            apply_encoding(categorical_table(["a", None]), {"c": emap})

    def test_numeric_passthrough(self):
        table = build_table(
            [("x", NUMERIC), ("c", CATEGORICAL)], {"x": [7.0, 8.0], "c": ["a", "b"]}
        )
        emap = fit_encoding(table, "c")
        out = apply_encoding(table, {"c": emap})
        assert list(out.column("x")) == [7.0, 8.0]


class TestScale:
    def test_max_abs_division(self):
        table = numeric_table([2, -4, 1])
        factors = fit_scale(table)
        assert factors["x"] == 4
        assert list(apply_scale(table, factors).column("x")) == [0.5, -1.0, 0.25]

    def test_all_zero_column_unchanged(self):
        table = numeric_table([0, 0, 0])
        factors = fit_scale(table)
        assert factors["x"] == 1.0
        assert list(apply_scale(table, factors).column("x")) == [0, 0, 0]

    def test_city_development_index_example(self):
        table = numeric_table([0.92, 0.776, 0.624])
        factors = fit_scale(table)
        assert factors["x"] == 0.92
        out = list(apply_scale(table, factors).column("x"))
        assert out == pytest.approx([1.0, 0.8434782608695652, 0.6782608695652174], abs=1e-12)

    @given(
        st.lists(
            st.floats(min_value=-1e6, max_value=1e6, allow_nan=False), min_size=1, max_size=30
        )
    )
    def test_fit_time_data_maps_into_unit_interval(self, values):
        table = numeric_table(values)
        scaled = np.asarray(apply_scale(table, fit_scale(table)).column("x"))
        assert (scaled >= -1.0).all() and (scaled <= 1.0).all()
        # sign and order preserved
        raw = np.asarray(values)
        assert (np.sign(scaled) == np.sign(raw)).all()
        assert (np.argsort(scaled, kind="stable") == np.argsort(raw, kind="stable")).all()

    def test_uncovered_column_is_coverage_error(self):
        with pytest.raises(CoverageError):
            apply_scale(numeric_table([1.0]), {})


class TestFittedPreprocessor:
    def test_fit_is_deterministic(self, sample8):
        a = FittedPreprocessor.fit(sample8)
        b = FittedPreprocessor.fit(sample8)
        assert a.to_json() == b.to_json()

    def test_transform_output_all_numeric_and_complete(self):
        table = build_table(
            [
                ("id", NUMERIC, (), "identifier"),
                ("x", NUMERIC),
                ("c", CATEGORICAL, ("a", "b")),
                ("target", NUMERIC, (), "target"),
            ],
            {
                "id": [1, 2, 3, 4],
                "x": [1.0, np.nan, 3.0, 4.0],
                "c": ["a", "b", None, "a"],
                "target": [0, 1, 0, 1],
            },
        )
        pre, transformed = FittedPreprocessor.fit_transform(table)
        assert pre.dropped == ("id",)
        assert all(c.kind == NUMERIC for c in transformed.schema)
        for name in transformed.schema.names:
            assert not transformed.missing_mask(name).any()
            values = np.asarray(transformed.column(name))
            assert (np.abs(values) <= 1.0).all()
        # target column survives unscathed: {0,1} has max-abs 1
        assert list(transformed.column("target")) == [0, 1, 0, 1]

    def test_json_round_trip_replays_identically(self, sample8):
        pre, transformed = FittedPreprocessor.fit_transform(sample8)
        again = FittedPreprocessor.from_json(pre.to_json())
        replayed = again.transform(sample8)
        assert replayed == transformed
        assert again.to_json() == pre.to_json()

    def test_transform_tolerates_absent_target_column(self, sample8):
        pre = FittedPreprocessor.fit(sample8)
        unlabeled = sample8.select(
            [c.name for c in sample8.schema if c.role != "target"]
        )
        out = pre.transform(unlabeled)
        assert "target" not in out.schema.names
        assert out.n_rows == sample8.n_rows

    def test_every_feature_column_covered_by_exactly_one_stat_domain(self, sample8):
        pre = FittedPreprocessor.fit(sample8)
        for col in pre.input_schema:
            assert col.name in pre.impute_stats
            assert (col.name in pre.encoding_maps) == (col.kind == CATEGORICAL)
        for col in pre.output_schema:
            assert pre.scale_factors[col.name] > 0
