"""Bluebottle presence toolkit."""

from ._core import (
    Dataset,
    Error,
    Model,
    ValidationError,
    bin_direction,
    cli,
    confusion_matrix,
    evaluate,
    generate_fixture,
    load_observations,
    pca,
    point_biserial,
    pr_curve,
    random_undersample,
    resample,
    roc_auc,
    run_experiment,
    smote_nc,
    split_train_test,
    synthetic_negative,
    train,
)

__all__ = [
    "Dataset",
    "Error",
    "Model",
    "ValidationError",
    "bin_direction",
    "cli",
    "confusion_matrix",
    "evaluate",
    "generate_fixture",
    "load_observations",
    "pca",
    "point_biserial",
    "pr_curve",
    "random_undersample",
    "resample",
    "roc_auc",
    "run_experiment",
    "smote_nc",
    "split_train_test",
    "synthetic_negative",
    "train",
]
