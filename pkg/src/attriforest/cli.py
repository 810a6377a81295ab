"""Pipeline CLI: ingest, clean, convert, transform, fit, cross-validate, report.

Subcommands: ``eda``, ``train``, ``cv`` (the full pipeline), ``compare``.
Configuration comes from defaults, then an optional key=value config file,
then CLI flags (highest precedence). All report files are written only after
every stage succeeds, so a failed run leaves no partial outputs.

Exit codes: 0 success, 2 config error, 3 data error, 4 runtime error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from .baselines import (
    LogisticConfig,
    LogisticRegressionModel,
    MajorityModel,
    comparison_to_csv,
    default_registry,
)
from .dtree import TreeModel, TreeParams, tree_to_json
from .errors import ConfigError, DataError
from .eda import correlation_matrix, correlation_to_json, distribution_report, distribution_to_csv
from .evaluate import (
    KFOLD_SCHEME,
    LOOCV_SCHEME,
    cv_to_json,
    cv_to_text,
    kfold,
    loocv,
    metrics,
    oversample_minority,
    report_to_json,
    report_to_text,
)
from .forest import ForestModel, ForestParams, forest_to_json
from .preprocess import FittedPreprocessor
from .tabular import Table, hr_schema, load_csv, load_schema, split_columns

MODEL_CHOICES = ("forest", "tree", "logreg", "majority")

# rng stream derivations from the master seed, so every stage is reproducible
HOLDOUT_SEED_OFFSET = 101
OVERSAMPLE_SEED_OFFSET = 102
KFOLD_SEED_OFFSET = 103


@dataclass(frozen=True)
class PipelineConfig:
    """Every field has a default; an empty config runs the paper-style
    pipeline (forest + loocv + oversample) on the provided data."""

    data: str | None = None
    schema: str | None = None          # schema file path; None uses the HR schema
    encoding_policy: str = "alphabetical"
    onehot_threshold: int = 5
    model: str = "forest"
    n_trees: int = 100
    max_depth: int | None = None
    feature_subset: str = "sqrt"
    cv: str = "loocv"                  # "loocv" or "kfold:K"
    oversample: bool = True
    seed: int = 0
    out: str = "out"
    holdout: float = 0.0
    loocv_row_cap: int = 2000
    bins: int = 10

    def cv_scheme(self) -> tuple[str, int | None]:
        if self.cv == LOOCV_SCHEME:
            return LOOCV_SCHEME, None
        if self.cv.startswith(KFOLD_SCHEME + ":"):
            try:
                k = int(self.cv.split(":", 1)[1])
            except ValueError:
                raise ConfigError(f"bad --cv value {self.cv!r}; expected loocv or kfold:K") from None
            if k < 2:
                raise ConfigError(f"kfold needs k >= 2, got {k}")
            return KFOLD_SCHEME, k
        raise ConfigError(f"bad --cv value {self.cv!r}; expected loocv or kfold:K")

    def validate(self) -> "PipelineConfig":
        if self.model not in MODEL_CHOICES:
            raise ConfigError(f"unknown model {self.model!r}; choose from {MODEL_CHOICES}")
        if self.onehot_threshold < 1:
            raise ConfigError("onehot_threshold must be >= 1")
        if self.n_trees < 1:
            raise ConfigError("n_trees must be >= 1")
        if not 0.0 <= self.holdout < 1.0:
            raise ConfigError("holdout must be in [0, 1)")
        if self.bins < 1:
            raise ConfigError("bins must be >= 1")
        self.cv_scheme()
        return self

    def forest_params(self) -> ForestParams:
        subset = self.feature_subset
        if isinstance(subset, str) and subset not in ("sqrt", "all"):
            subset = int(subset)
        return ForestParams(
            n_estimators=self.n_trees,
            max_depth=self.max_depth,
            feature_subset_size=subset,
            seed=self.seed,
        )


def load_config_file(path) -> dict:
    """Flat key=value document; every key mirrors a CLI flag."""
    values: dict[str, str] = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"config line {lineno}: expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip()
    return _coerce_config_values(values)


def _coerce_config_values(values: dict) -> dict:
    out: dict[str, object] = {}
    field_types = {f.name: f for f in fields(PipelineConfig)}
    for key, raw in values.items():
        if key not in field_types:
            raise ConfigError(f"unknown config key {key!r}")
        if key in ("onehot_threshold", "n_trees", "seed", "loocv_row_cap", "bins"):
            out[key] = int(raw)
        elif key == "max_depth":
            out[key] = None if str(raw).lower() in ("", "none") else int(raw)
        elif key == "holdout":
            out[key] = float(raw)
        elif key == "oversample":
            out[key] = str(raw).lower() in ("1", "true", "yes", "on")
        else:
            out[key] = raw
    return out


def build_config(file_values: dict, cli_values: dict) -> PipelineConfig:
    config = PipelineConfig()
    if file_values:
        config = replace(config, **file_values)
    overrides = {k: v for k, v in cli_values.items() if v is not None}
    if overrides:
        config = replace(config, **overrides)
    return config.validate()


# ---------------------------------------------------------------------------
# Pipeline runs
# ---------------------------------------------------------------------------

@dataclass
class PipelineResult:
    stage_log: list[str]
    artifacts: dict[str, Path]
    mean_cv_accuracy: float | None = None


class _StageLog(list):
    """Stage-name list that also tracks the most recent entry on the run."""

    def __init__(self, run: "_Run"):
        super().__init__()
        self._run = run

    def append(self, name: str) -> None:
        super().append(name)
        self._run.current = name


class _Run:
    """Tracks the current stage and defers writes until the run succeeds."""

    def __init__(self, config: PipelineConfig):
        self.config = config
        self.log = _StageLog(self)
        self.current = "setup"
        self.pending: list[tuple[Path, str]] = []
        self.out = Path(config.out)

    def stage(self, name: str) -> None:
        self.log.append(name)

    def defer(self, relpath: str, content: str) -> Path:
        path = self.out / relpath
        self.pending.append((path, content))
        return path

    def flush(self) -> None:
        for path, content in self.pending:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(content, encoding="utf-8")


def _load_table(run: _Run) -> Table:
    run.stage("load")
    config = run.config
    if not config.data:
        raise ConfigError("no --data file given")
    schema = load_schema(config.schema) if config.schema else hr_schema()
    return load_csv(config.data, schema)


def _eda_artifacts(run: _Run, table: Table) -> dict[str, Path]:
    run.stage("eda")
    artifacts = {}
    report = distribution_report(table, run.config.bins)
    for name, dist in report.items():
        artifacts[f"eda/{name}"] = run.defer(f"eda/{name}_distribution.csv", distribution_to_csv(dist))
    corr = correlation_matrix(table)
    artifacts["eda/correlations"] = run.defer("eda/correlations.json", correlation_to_json(corr))
    return artifacts


def _preprocess(run: _Run, table: Table):
    config = run.config
    fitted, transformed = FittedPreprocessor.fit_transform(
        table, config.encoding_policy, config.onehot_threshold, stage_log=run.log
    )
    run.stage("split")
    features, target = split_columns(transformed)
    return fitted, features, target


def _carve_holdout(run: _Run, features: Table, target):
    config = run.config
    n = features.n_rows
    n_hold = int(round(config.holdout * n))
    if n_hold == 0:
        return features, target, None, None
    rng = np.random.default_rng(config.seed + HOLDOUT_SEED_OFFSET)
    order = rng.permutation(n)
    hold_idx, train_idx = np.sort(order[:n_hold]), np.sort(order[n_hold:])
    return (
        features.take(train_idx),
        target[train_idx],
        features.take(hold_idx),
        target[hold_idx],
    )


def _model_factory(config: PipelineConfig):
    if config.model == "forest":
        params = config.forest_params()
        return lambda seed: ForestModel(replace(params, seed=seed))
    if config.model == "tree":
        params = TreeParams(max_depth=config.max_depth, seed=config.seed)
        return lambda seed: TreeModel(replace(params, seed=seed))
    if config.model == "logreg":
        logistic = LogisticConfig(seed=config.seed)
        return lambda seed: LogisticRegressionModel(replace(logistic, seed=seed))
    return lambda seed: MajorityModel()


def _model_json(config: PipelineConfig, model) -> str:
    if isinstance(model, ForestModel):
        return forest_to_json(model.forest)
    if isinstance(model, TreeModel):
        return tree_to_json(model.tree)
    if isinstance(model, LogisticRegressionModel):
        m = model.model
        doc = {
            "kind": "logreg",
            "weights": list(m.weights),
            "bias": m.bias,
            "feature_names": list(m.feature_names),
            "config": {"learning_rate": m.config.learning_rate, "epochs": m.config.epochs, "seed": m.config.seed},
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"
    return json.dumps({"kind": "majority", "label": model.label}, indent=2, sort_keys=True) + "\n"


def _run_cv(run: _Run, factory, features: Table, target):
    run.stage("cv")
    config = run.config
    scheme, k = config.cv_scheme()
    if scheme == LOOCV_SCHEME:
        if features.n_rows > config.loocv_row_cap:
            raise ConfigError(
                f"LOOCV over {features.n_rows} rows exceeds the cap of "
                f"{config.loocv_row_cap}; use --cv kfold:K or raise loocv_row_cap"
            )
        return loocv(factory, features, target, seed=config.seed)
    rng = np.random.default_rng(config.seed + KFOLD_SEED_OFFSET)
    return kfold(factory, features, target, k, rng, seed=config.seed)


def run_pipeline(config: PipelineConfig) -> PipelineResult:
    """The full pipeline behind the ``cv`` subcommand.

    Stage order follows the block diagram: load, eda, impute, encode, scale,
    split, (holdout), (oversample), fit, cv, score, report. Writes the eda
    report, metrics report, CV result, fitted model, and fitted preprocessor
    under the output directory and prints the mean CV accuracy.
    """
    run = _Run(config)
    result = PipelineResult(run.log, {})
    try:
        table = _load_table(run)
        result.artifacts.update(_eda_artifacts(run, table))
        fitted, features, target = _preprocess(run, table)
        features, target, hold_features, hold_target = _carve_holdout(run, features, target)
        if config.oversample:
            run.stage("oversample")
            rng = np.random.default_rng(config.seed + OVERSAMPLE_SEED_OFFSET)
            features, target = oversample_minority(features, target, rng)
        run.stage("fit")
        factory = _model_factory(config)
        model = factory(config.seed).fit(features, target)
        cv_result = _run_cv(run, factory, features, target)
        run.stage("score")
        if hold_features is not None:
            predictions = [model.predict_row(hold_features.row(i)) for i in range(hold_features.n_rows)]
            report = metrics(hold_target, predictions)
            evaluated_on = "holdout"
        else:
            predictions = [model.predict_row(features.row(i)) for i in range(features.n_rows)]
            report = metrics(target, predictions)
            evaluated_on = "training (in-sample)"
        run.stage("report")
        result.artifacts["metrics"] = run.defer("metrics.json", report_to_json(report, evaluated_on))
        run.defer("metrics.txt", report_to_text(report))
        result.artifacts["cv_result"] = run.defer("cv_result.json", cv_to_json(cv_result))
        run.defer("cv_result.txt", cv_to_text(cv_result))
        result.artifacts["model"] = run.defer("model.json", _model_json(config, model))
        result.artifacts["preprocessor"] = run.defer("preprocessor.json", fitted.to_json())
        run.flush()
    except Exception as exc:
        raise PipelineFailure(run.current, exc) from exc
    result.mean_cv_accuracy = cv_result.mean_accuracy
    print(f"mean CV accuracy: {cv_result.mean_accuracy:.4f}")
    return result


def run_eda(config: PipelineConfig) -> PipelineResult:
    run = _Run(config)
    result = PipelineResult(run.log, {})
    try:
        table = _load_table(run)
        result.artifacts.update(_eda_artifacts(run, table))
        run.flush()
    except Exception as exc:
        raise PipelineFailure(run.current, exc) from exc
    return result


def run_train(config: PipelineConfig) -> PipelineResult:
    run = _Run(config)
    result = PipelineResult(run.log, {})
    try:
        table = _load_table(run)
        fitted, features, target = _preprocess(run, table)
        features, target, hold_features, hold_target = _carve_holdout(run, features, target)
        if config.oversample:
            run.stage("oversample")
            rng = np.random.default_rng(config.seed + OVERSAMPLE_SEED_OFFSET)
            features, target = oversample_minority(features, target, rng)
        run.stage("fit")
        model = _model_factory(config)(config.seed).fit(features, target)
        run.stage("score")
        if hold_features is not None:
            predictions = [model.predict_row(hold_features.row(i)) for i in range(hold_features.n_rows)]
            report = metrics(hold_target, predictions)
            evaluated_on = "holdout"
        else:
            predictions = [model.predict_row(features.row(i)) for i in range(features.n_rows)]
            report = metrics(target, predictions)
            evaluated_on = "training (in-sample)"
        run.stage("report")
        result.artifacts["metrics"] = run.defer("metrics.json", report_to_json(report, evaluated_on))
        run.defer("metrics.txt", report_to_text(report))
        result.artifacts["model"] = run.defer("model.json", _model_json(config, model))
        result.artifacts["preprocessor"] = run.defer("preprocessor.json", fitted.to_json())
        run.flush()
    except Exception as exc:
        raise PipelineFailure(run.current, exc) from exc
    return result


def run_compare(config: PipelineConfig) -> PipelineResult:
    run = _Run(config)
    result = PipelineResult(run.log, {})
    try:
        table = _load_table(run)
        _, features, target = _preprocess(run, table)
        if config.oversample:
            run.stage("oversample")
            rng = np.random.default_rng(config.seed + OVERSAMPLE_SEED_OFFSET)
            features, target = oversample_minority(features, target, rng)
        run.stage("cv")
        scheme, k = config.cv_scheme()
        if scheme == LOOCV_SCHEME and features.n_rows > config.loocv_row_cap:
            raise ConfigError(
                f"LOOCV over {features.n_rows} rows exceeds the cap of "
                f"{config.loocv_row_cap}; use --cv kfold:K or raise loocv_row_cap"
            )
        registry = default_registry(
            forest_params=config.forest_params(),
            tree_params=TreeParams(max_depth=config.max_depth, seed=config.seed),
        )
        rows = []
        for name in sorted(registry):
            factory = registry[name]
            if scheme == LOOCV_SCHEME:
                cv_result = loocv(factory, features, target, seed=config.seed)
            else:
                rng = np.random.default_rng(config.seed + KFOLD_SEED_OFFSET)
                cv_result = kfold(factory, features, target, k, rng, seed=config.seed)
            rows.append((name, cv_result.mean_accuracy))
            print(f"{name}: {cv_result.mean_accuracy:.4f}")
        rows.sort(key=lambda r: (-r[1], r[0]))
        run.stage("report")
        result.artifacts["comparison"] = run.defer("comparison.csv", comparison_to_csv(rows))
        run.flush()
    except Exception as exc:
        raise PipelineFailure(run.current, exc) from exc
    return result


class PipelineFailure(Exception):
    """Wraps a stage failure with the stage name for error reporting."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value config file; CLI flags override it")
    common.add_argument("--data", help="input CSV path")
    common.add_argument("--schema", help="schema file path (default: built-in HR schema)")
    common.add_argument("--model", choices=MODEL_CHOICES)
    common.add_argument("--n-trees", type=int, dest="n_trees")
    common.add_argument("--max-depth", type=int, dest="max_depth")
    common.add_argument("--cv", help="loocv or kfold:K")
    common.add_argument("--oversample", action=argparse.BooleanOptionalAction, default=None)
    common.add_argument(
        "--encoding-policy", choices=("alphabetical", "schema_order"), dest="encoding_policy"
    )
    common.add_argument("--onehot-threshold", type=int, dest="onehot_threshold")
    common.add_argument("--seed", type=int)
    common.add_argument("--out", help="output directory")
    common.add_argument("--holdout", type=float, help="holdout fraction for metrics")
    common.add_argument("--bins", type=int, help="histogram bins for eda")

    parser = argparse.ArgumentParser(prog="attriforest", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("eda", parents=[common], help="distribution and correlation reports")
    sub.add_parser("train", parents=[common], help="fit a model and report in-sample metrics")
    sub.add_parser("cv", parents=[common], help="full pipeline with cross-validation")
    sub.add_parser("compare", parents=[common], help="cross-validate every model")
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        file_values = load_config_file(args.config) if args.config else {}
    except FileNotFoundError as exc:
        print(f"error: config file not found: {exc}", file=sys.stderr)
        return 2
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    cli_values = {
        name: getattr(args, name, None)
        for name in (
            "data", "schema", "model", "n_trees", "max_depth", "cv", "oversample",
            "encoding_policy", "onehot_threshold", "seed", "out", "holdout", "bins",
        )
    }
    try:
        config = build_config(file_values, cli_values)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    runner = {"eda": run_eda, "train": run_train, "cv": run_pipeline, "compare": run_compare}[args.command]
    try:
        result = runner(config)
    except PipelineFailure as failure:
        print(f"error: {failure}", file=sys.stderr)
        cause = failure.cause
        if isinstance(cause, ConfigError):
            return 2
        if isinstance(cause, (DataError, FileNotFoundError)):
            return 3
        return 4
    for name in sorted(result.artifacts):
        print(f"wrote {result.artifacts[name]}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
