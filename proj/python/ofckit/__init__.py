"""Ensemble-learning toolkit for food-challenge outcome prediction.

Thin convenience layer over the compiled core: JSON-text arguments of the
native functions accept Python dicts here.
"""

import json as _json

from ofckit._ofckit import (
    Model,
    ParseError,
    Partition,
    Table,
    UndefinedMetricError,
    ValidationError,
    __version__,
    auc,
    binarize,
    drop_columns,
    drop_incomplete,
    explain,
    make_partition,
    metrics,
    mrmr_rank,
    mutual_information,
    normalize_censored,
    one_hot_encode,
    read_csv,
    smote,
    write_csv,
    write_schema,
)
from ofckit import _ofckit as _native

__all__ = [
    "Model",
    "ParseError",
    "Partition",
    "Table",
    "UndefinedMetricError",
    "ValidationError",
    "__version__",
    "auc",
    "binarize",
    "drop_columns",
    "drop_incomplete",
    "explain",
    "fit",
    "generate",
    "make_partition",
    "metrics",
    "mrmr_rank",
    "mutual_information",
    "normalize_censored",
    "one_hot_encode",
    "read_csv",
    "run_experiment",
    "smote",
    "write_csv",
    "write_schema",
]


def _as_json_text(value, default=""):
    if value is None:
        return default
    if isinstance(value, str):
        return value
    return _json.dumps(value)


def generate(spec=None):
    """Generate a synthetic dataset from a spec dict (or JSON text).

    Returns (table, manifest dict naming the ground-truth columns).
    """
    table, manifest = _native.generate(_as_json_text(spec))
    return table, _json.loads(manifest)


def fit(kind, train, features=(), hyperparameters=None, seed=0):
    """Train one classifier; hyperparameters may be a dict or JSON text."""
    return _native.fit(
        kind,
        train,
        list(features),
        _as_json_text(hyperparameters),
        seed,
    )


def run_experiment(config):
    """Run the full pipeline from a config dict (or JSON text).

    Persists artifacts when the config names an output_dir; returns the
    result document as a dict.
    """
    return _json.loads(_native.run_experiment(_as_json_text(config)))
