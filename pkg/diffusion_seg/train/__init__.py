"""Training of cascade parameters and the importance head"""

from .backward import CascadeGradients, SeedInputs, backward_cascade
from .gradcheck import (
    GradientEntry,
    GradientReport,
    compare_gradients,
    grad_check,
    numerical_gradient,
    random_instance,
    relative_error,
)
from .loss import cross_entropy
from .parameters import load_params, pack, parameter_names, save_params, unpack
from .trainer import FitResult, TrainConfig, TrainingInstance, dataset_loss, fit, prepare_instance

__all__ = [
    "CascadeGradients",
    "SeedInputs",
    "backward_cascade",
    "GradientEntry",
    "GradientReport",
    "compare_gradients",
    "grad_check",
    "numerical_gradient",
    "random_instance",
    "relative_error",
    "cross_entropy",
    "load_params",
    "save_params",
    "pack",
    "unpack",
    "parameter_names",
    "FitResult",
    "TrainConfig",
    "TrainingInstance",
    "dataset_loss",
    "fit",
    "prepare_instance",
]
