"""Synthetic tabular data from a small GAN, oversampling baselines, and tree-based scoring."""

from .data import Dataset, DataError, load_csv, minmax_scale, split_sequential, write_csv
from .evaluation import ClassificationReport, aggregate, classification_metrics, mean_nn_distance
from .gan import GanConfig, GanModel, TrainingLog, build_gan, synthesize, train_gan
from .nn import MlpNetwork, TrainingDivergedError

__version__ = "0.1.0"

__all__ = [
    "ClassificationReport",
    "DataError",
    "Dataset",
    "GanConfig",
    "GanModel",
    "MlpNetwork",
    "TrainingDivergedError",
    "TrainingLog",
    "aggregate",
    "build_gan",
    "classification_metrics",
    "load_csv",
    "mean_nn_distance",
    "minmax_scale",
    "split_sequential",
    "synthesize",
    "train_gan",
    "write_csv",
]
