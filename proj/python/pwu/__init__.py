"""Patch-based unlearning for ReLU classifiers (C++ core)."""

from ._pwu import (
    Box,
    EmptyRegionError,
    LinearRegion,
    Model,
    NumericError,
    ParseError,
    SamplingError,
    ShapeError,
    ValidationError,
    accuracy,
    load_data,
    load_model,
    mean_loss,
    mia_recall,
    model_from_json,
    region_of,
    robust_radius,
    solve_lp,
    train,
    unlearn,
)

__version__ = "0.1.0"

__all__ = [
    "Box",
    "EmptyRegionError",
    "LinearRegion",
    "Model",
    "NumericError",
    "ParseError",
    "SamplingError",
    "ShapeError",
    "ValidationError",
    "accuracy",
    "load_data",
    "load_model",
    "mean_loss",
    "mia_recall",
    "model_from_json",
    "region_of",
    "robust_radius",
    "solve_lp",
    "train",
    "unlearn",
]
