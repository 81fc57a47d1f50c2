"""numgen: a laboratory for count-exact image generation.

Count-exact synthetic scenes from planned layouts, count-aware manipulations
of sampler noise, exact component-based counting, counting metrics, spatial
stability analytics, and a desk-scale rectified-flow model to study how
initial noise dominates generated object counts.
"""

__version__ = "0.1.0"

from ._kernels import BACKEND as kernel_backend
from .layout import BBox, LayoutSpec, PlacementFailure, plan_grid_layout, plan_random_layout
from .metrics import bucket_report, exact_accuracy, mean_absolute_error, tolerance_accuracy
from .noise import PriorConfig, apply_prior, map_boxes_to_latent, sample_noise
from .oracle import ComponentReport, CountPair, count_components, evaluate_set

__all__ = [
    "BBox", "ComponentReport", "CountPair", "LayoutSpec", "PlacementFailure",
    "PriorConfig", "apply_prior", "bucket_report", "count_components",
    "evaluate_set", "exact_accuracy", "kernel_backend", "map_boxes_to_latent",
    "mean_absolute_error", "plan_grid_layout", "plan_random_layout",
    "sample_noise", "tolerance_accuracy",
]
