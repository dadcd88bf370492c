"""Set classifiers, set objectives and iterative subset selection."""

from ._subsel import (
    ConfigError,
    DataError,
    Error,
    NumericError,
    PointSet,
    SetClassifier,
    SetObjective,
    brute_force_opt,
    coverage_objective,
    facility_location_objective,
    linear_objective,
    make_dataset,
    modular_objective,
    neural_objective,
    read_dataset,
    run_attack,
    select,
    train,
)

__all__ = [
    "ConfigError",
    "DataError",
    "Error",
    "NumericError",
    "PointSet",
    "SetClassifier",
    "SetObjective",
    "brute_force_opt",
    "coverage_objective",
    "facility_location_objective",
    "linear_objective",
    "make_dataset",
    "modular_objective",
    "neural_objective",
    "read_dataset",
    "run_attack",
    "select",
    "train",
]
