"""Rule-based forecasting on temporal knowledge graphs."""

import json

from ._tkgrules import (
    ConfidenceModel,
    DataError,
    Dataset,
    RuleSet,
    aggregate,
    learn,
)
from ._tkgrules import _evaluate, _explain, _predict

__all__ = [
    "ConfidenceModel",
    "DataError",
    "Dataset",
    "RuleSet",
    "aggregate",
    "evaluate",
    "explain",
    "learn",
    "predict",
]


def evaluate(dataset, rules, split="test", **options):
    """Single-step evaluation; returns the report as a dict."""
    return json.loads(_evaluate(dataset, rules, split=split, **options))


def predict(dataset, rules, subject, relation, time, **options):
    """Top candidates for (subject, relation, ?, time) as (entity, score) pairs."""
    return _predict(dataset, rules, subject, relation, str(time), **options)


def explain(dataset, rules, subject, relation, time, candidate, **options):
    """Rules behind one candidate's score for the query (subject, relation, ?, time)."""
    return json.loads(_explain(dataset, rules, subject, relation, str(time), candidate, **options))
