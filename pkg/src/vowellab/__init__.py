"""Simulated vowel production and feature-metric evaluation harness."""

__version__ = "0.1.0"

from .errors import VowellabError
from .tract import AreaFunction, Model, VocalTractShape, shape_to_area
from .acoustics import FormantPoint, TransferFunction, pick_formants, transfer_function
from .features import FeatureMatrix, FeatureParams, FeatureVariant, enumerate_variants
from .metrics import ALL_METRICS, DistanceMetric, distance, reduce_static
from .targets import TargetSet, TargetVowel, build_target_set, load_target_set
from .evaluation import (
    ModelDataset,
    OptimizationResult,
    SpeakerFormantStats,
    aggregate_report,
    evaluate_grid,
    load_dataset,
    optimize_pair,
)
from .surface import ErrorSurfaceGrid, build_surface, export_surface
from .pipeline import run_campaign

__all__ = [
    "__version__", "VowellabError",
    "AreaFunction", "Model", "VocalTractShape", "shape_to_area",
    "FormantPoint", "TransferFunction", "pick_formants", "transfer_function",
    "FeatureMatrix", "FeatureParams", "FeatureVariant", "enumerate_variants",
    "ALL_METRICS", "DistanceMetric", "distance", "reduce_static",
    "TargetSet", "TargetVowel", "build_target_set", "load_target_set",
    "ModelDataset", "OptimizationResult", "SpeakerFormantStats",
    "aggregate_report", "evaluate_grid", "load_dataset", "optimize_pair",
    "ErrorSurfaceGrid", "build_surface", "export_surface",
    "run_campaign",
]
