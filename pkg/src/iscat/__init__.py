"""2-D TM electromagnetic inverse scattering toolkit.

Forward MoM simulation, backpropagation initialization, and an untrained
current-predicting network driven by a composite physics loss.
"""

from .forward import CurrentSet, FieldSet, SolverError, add_awgn, incident_fields, scattered_fields, solve_total_field
from .losses import LossBreakdown
from .operators import GreenOperators, apply_gd, build_operators, green2d
from .report import metric_rrmse
from .scene import (
    ContrastMap,
    GeometryError,
    Grid,
    ImagingSetup,
    ShapeSpec,
    builtin_profile,
    default_grid,
    default_setup,
    rasterize_scene,
)
from .train import ReconstructionResult, TrainConfig, reconstruct

__all__ = [
    "ContrastMap",
    "CurrentSet",
    "FieldSet",
    "GeometryError",
    "GreenOperators",
    "Grid",
    "ImagingSetup",
    "LossBreakdown",
    "ReconstructionResult",
    "ShapeSpec",
    "SolverError",
    "TrainConfig",
    "add_awgn",
    "apply_gd",
    "build_operators",
    "builtin_profile",
    "default_grid",
    "default_setup",
    "green2d",
    "incident_fields",
    "metric_rrmse",
    "rasterize_scene",
    "reconstruct",
    "scattered_fields",
    "solve_total_field",
]

__version__ = "0.1.0"
