"""Density-map toolkit for line-segment annotated datasets.

Turns line labels of elongated objects into ground-truth density maps
(isotropic and anisotropic Gaussian schemes), extracts counts by
integration, scores predictions, and deduplicates image sets by
multi-scale feature distance.
"""

from .annotations import (
    AnnotationError,
    AnnotationSet,
    LineLabel,
    Point2,
    annotation_from_dict,
    annotation_to_dict,
    line_length,
    load_annotations,
    midpoint,
    sample_points,
    save_annotations,
    slope_angle,
)
from .dedup import (
    DropEvent,
    FeatureStack,
    builtin_feature_pyramid,
    deduplicate,
    feature_distance,
    load_stack,
    save_stack,
)
from .density import (
    DensityMap,
    agk_density_map,
    count_from_density,
    density_map,
    dot_density_map,
    line_density_map,
    load_dmap,
    save_dmap,
    save_pgm,
)
from .evaluation import (
    DensityLevel,
    EvalRecord,
    EvalReport,
    density_level,
    evaluate_dataset,
    mae,
    pixel_mse,
    rmse,
)
from .kernels import (
    KernelConfig,
    KernelPatch,
    agk_patch,
    agk_sigmas,
    isotropic_patch,
    line_sigma,
)

__version__ = "0.1.0"

__all__ = [
    "AnnotationError",
    "AnnotationSet",
    "DensityLevel",
    "DensityMap",
    "DropEvent",
    "EvalRecord",
    "EvalReport",
    "FeatureStack",
    "KernelConfig",
    "KernelPatch",
    "LineLabel",
    "Point2",
    "agk_density_map",
    "agk_patch",
    "agk_sigmas",
    "annotation_from_dict",
    "annotation_to_dict",
    "builtin_feature_pyramid",
    "count_from_density",
    "deduplicate",
    "density_level",
    "density_map",
    "dot_density_map",
    "evaluate_dataset",
    "feature_distance",
    "isotropic_patch",
    "line_density_map",
    "line_length",
    "line_sigma",
    "load_annotations",
    "load_dmap",
    "load_stack",
    "mae",
    "midpoint",
    "pixel_mse",
    "rmse",
    "sample_points",
    "save_annotations",
    "save_dmap",
    "save_pgm",
    "save_stack",
    "slope_angle",
]
