import numpy as np
import pytest

from attriforest.baselines import (
    LogisticConfig,
    MajorityModel,
    compare_models,
    comparison_to_csv,
    default_registry,
    fit_logreg,
    log_loss,
    loss_gradient,
    predict_logreg,
)
from attriforest.errors import ValidationError, WrongKindError
from attriforest.tabular import CATEGORICAL, NUMERIC

from conftest import build_table


def single_feature_table(values):
    return build_table([("x", NUMERIC)], {"x": values})


class TestTraining:
    def test_separable_set_reaches_perfect_training_accuracy(self):
        values = [-1.0, -0.8, -0.6, -0.4, -0.2, 0.2, 0.4, 0.6, 0.8, 1.0]
        target = [1 if v > 0 else 0 for v in values]
        table = single_feature_table(values)
        model = fit_logreg(table, target, LogisticConfig(learning_rate=0.5, epochs=2000))
        predictions = [predict_logreg(model, [v])[1] for v in values]
        assert predictions == target

    def test_all_positive_labels_push_probability_above_half(self):
        table = single_feature_table([0.1, 0.5, -0.3, 0.9])
        model = fit_logreg(table, [1, 1, 1, 1], LogisticConfig(epochs=200))
        for v in (-0.3, 0.0, 0.9):
            assert predict_logreg(model, [v])[0] > 0.5

    def test_zero_epochs_keeps_zero_weights(self):
        table = single_feature_table([1.0, -1.0])
        model = fit_logreg(table, [1, 0], LogisticConfig(epochs=0))
        assert list(model.weights) == [0.0] and model.bias == 0.0
        probability, label = predict_logreg(model, [123.0])
        assert probability == 0.5 and label == 1  # >= rule

    def test_loss_monotone_at_small_learning_rate(self):
        rng = np.random.default_rng(12)
        X = rng.normal(size=(30, 3))
        y = (X[:, 0] + 0.5 * X[:, 1] > 0).astype(float)
        table = build_table(
            [("a", NUMERIC), ("b", NUMERIC), ("c", NUMERIC)],
            {"a": X[:, 0], "b": X[:, 1], "c": X[:, 2]},
        )
        model = fit_logreg(table, y, LogisticConfig(learning_rate=0.01, epochs=300))
        history = np.asarray(model.loss_history)
        assert (np.diff(history) <= 1e-12).all()

    def test_nan_features_rejected(self):
        table = single_feature_table([1.0, np.nan])
        with pytest.raises(ValidationError):
            fit_logreg(table, [0, 1])

    def test_non_numeric_column_rejected(self):
        table = build_table([("c", CATEGORICAL)], {"c": ["a", "b"]})
        with pytest.raises(WrongKindError):
            fit_logreg(table, [0, 1])

    def test_gradient_matches_central_differences(self):
        rng = np.random.default_rng(77)
        eps = 1e-6
        for _ in range(50):
            n, p = int(rng.integers(2, 12)), int(rng.integers(1, 4))
            X = rng.normal(size=(n, p))
            y = rng.integers(0, 2, size=n).astype(float)
            w = rng.normal(scale=0.5, size=p)
            b = float(rng.normal(scale=0.5))
            gw, gb = loss_gradient(w, b, X, y)
            for j in range(p):
                bump = np.zeros(p)
                bump[j] = eps
                numeric = (log_loss(w + bump, b, X, y) - log_loss(w - bump, b, X, y)) / (2 * eps)
                assert abs(gw[j] - numeric) <= 1e-5 * max(1.0, abs(numeric))
            numeric_b = (log_loss(w, b + eps, X, y) - log_loss(w, b - eps, X, y)) / (2 * eps)
            assert abs(gb - numeric_b) <= 1e-5 * max(1.0, abs(numeric_b))


class TestPrediction:
    def test_zero_model_predicts_half(self):
        table = single_feature_table([1.0, -1.0])
        model = fit_logreg(table, [1, 0], LogisticConfig(epochs=0))
        assert predict_logreg(model, [0.0]) == (0.5, 1)

    def test_large_positive_score_saturates_towards_one(self):
        table = single_feature_table([1.0, -1.0])
        model = fit_logreg(table, [1, 0], LogisticConfig(epochs=2000, learning_rate=1.0))
        probability, label = predict_logreg(model, [50.0])
        assert probability > 0.999 and label == 1

    def test_hand_computed_sigmoid(self):
        table = single_feature_table([1.0, -1.0])
        model = fit_logreg(table, [1, 0], LogisticConfig(epochs=0))
        object.__setattr__(model, "weights", np.array([1.0]))
        probability, _ = predict_logreg(model, [0.8473])
        assert probability == pytest.approx(0.700000449318495, abs=1e-9)

    def test_probabilities_stay_in_open_interval(self):
        rng = np.random.default_rng(3)
        table = single_feature_table(rng.normal(size=20))
        y = (np.asarray(table.column("x")) > 0).astype(int)
        model = fit_logreg(table, y, LogisticConfig(epochs=500))
        for v in np.linspace(-3, 3, 50):
            probability, _ = predict_logreg(model, [v])
            assert 0.0 < probability < 1.0

    def test_width_mismatch_rejected(self):
        table = build_table([("a", NUMERIC), ("b", NUMERIC)], {"a": [1.0, 0.0], "b": [0.0, 1.0]})
        model = fit_logreg(table, [0, 1], LogisticConfig(epochs=1))
        with pytest.raises(ValidationError):
            predict_logreg(model, [1.0])

    def test_dict_row_uses_feature_order(self):
        table = build_table([("a", NUMERIC), ("b", NUMERIC)], {"a": [1.0, 0.0], "b": [0.0, 1.0]})
        model = fit_logreg(table, [0, 1], LogisticConfig(epochs=50))
        p_dict, _ = predict_logreg(model, {"b": 1.0, "a": 0.0})
        p_vec, _ = predict_logreg(model, [0.0, 1.0])
        assert p_dict == p_vec


class TestCompare:
    def comparison_fixture(self):
        rng = np.random.default_rng(21)
        x = rng.uniform(size=24)
        noise = rng.normal(size=24)
        target = (x >= 0.4).astype(int)
        table = build_table([("x", NUMERIC), ("z", NUMERIC)], {"x": x, "z": noise})
        return table, target

    def test_forest_beats_constant_majority(self):
        table, target = self.comparison_fixture()
        rows = compare_models(table, target, scheme="kfold", k=4, seed=0)
        accuracy = dict(rows)
        assert accuracy["forest"] >= accuracy["majority"]

    def test_single_registered_model(self):
        table, target = self.comparison_fixture()
        rows = compare_models(
            table, target, scheme="kfold", k=4, seed=0,
            registry={"majority": lambda seed: MajorityModel()},
        )
        assert len(rows) == 1 and rows[0][0] == "majority"

    def test_same_seed_reproduces_table(self):
        table, target = self.comparison_fixture()
        a = compare_models(table, target, scheme="kfold", k=4, seed=5)
        b = compare_models(table, target, scheme="kfold", k=4, seed=5)
        assert a == b

    def test_rows_sorted_by_accuracy(self):
        table, target = self.comparison_fixture()
        rows = compare_models(table, target, scheme="kfold", k=4, seed=1)
        accuracies = [acc for _, acc in rows]
        assert accuracies == sorted(accuracies, reverse=True)
        text = comparison_to_csv(rows)
        assert text.startswith("model,accuracy")

    def test_registry_covers_expected_models(self):
        assert set(default_registry()) == {"forest", "tree", "logreg", "majority"}
