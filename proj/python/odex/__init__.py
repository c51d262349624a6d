"""Optimal augmentation designs for Gamma GLMs with a day effect.

Designs are lists of [L, K, D, FDV] rows for the new (day-1) runs; the bundled
30-run central composite design is always the fixed initial block.
"""

import json

from . import _odex
from ._odex import (
    OdexError,
    criterion_value,
    initial_design,
    model_names,
    optimize,
    published_design,
    published_keys,
    reference_design,
)

__all__ = [
    "OdexError",
    "criterion_value",
    "efficiency",
    "fit",
    "initial_design",
    "model_names",
    "optimize",
    "predict",
    "prediction_error",
    "published_design",
    "published_keys",
    "reference_design",
]


def fit(response, link=None, data=("ccd30",), day_effect=False):
    """Fit the bundled model of `response`; `data` lists bundled names or CSV paths."""
    return json.loads(_odex.fit(response, link, list(data), day_effect))


def predict(model, runs, day=1):
    return _odex.predict(json.dumps(model), runs, day)


def prediction_error(model, data, metric="mse"):
    return _odex.prediction_error(json.dumps(model), data, metric)


def efficiency(design, models=None, flavor="D", gammas="fixed", relative_to=None):
    return dict(_odex.efficiency(design, models, flavor, gammas, relative_to))
