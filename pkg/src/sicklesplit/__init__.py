"""Instance-level cell counting for time-lapse microscopy label maps.

The library turns per-frame class label maps (background / healthy /
sickled) into instance counts and sickled-fraction time series, splitting
merged same-class cells with a marker-controlled watershed on the smoothed
Euclidean distance transform. A synthetic-scene generator with exact
ground truth and a hyperparameter sweep harness support validation.
"""

__version__ = "0.1.0"

from .config import RunConfig, load_config
from .io import (
    FrameRecord,
    list_frames,
    read_image,
    read_label_map,
    write_image,
    write_label_map,
)
from .morphology import (
    ComponentLabeling,
    area_filter,
    class_mask,
    connected_components,
    distance_transform,
    gaussian_smooth,
)
from .overlay import ColorMap, render_masks_only, render_overlay
from .preprocess import ClaheParams, ResizeSpec, clahe, resize, to_grayscale
from .quantify import (
    FrameStats,
    SeriesStats,
    baseline_count,
    count_instances,
    frame_stats,
    read_counts_csv,
    series_mae,
    sickled_fraction,
    write_counts_csv,
)
from .sweep import ErrorCurve, SweepSpec, emit_curve, run_sweep
from .synth import (
    GroundTruth,
    SceneSpec,
    brute_force_count,
    generate_scene,
    scene_sequence,
)
from .watershed import (
    InstanceMap,
    MarkerSet,
    WatershedParams,
    detect_markers,
    split_all,
    split_boundaries,
    watershed_split,
)

__all__ = [
    "__version__",
    "RunConfig",
    "load_config",
    "FrameRecord",
    "list_frames",
    "read_image",
    "read_label_map",
    "write_image",
    "write_label_map",
    "ComponentLabeling",
    "area_filter",
    "class_mask",
    "connected_components",
    "distance_transform",
    "gaussian_smooth",
    "ColorMap",
    "render_masks_only",
    "render_overlay",
    "ClaheParams",
    "ResizeSpec",
    "clahe",
    "resize",
    "to_grayscale",
    "FrameStats",
    "SeriesStats",
    "baseline_count",
    "count_instances",
    "frame_stats",
    "read_counts_csv",
    "series_mae",
    "sickled_fraction",
    "write_counts_csv",
    "ErrorCurve",
    "SweepSpec",
    "emit_curve",
    "run_sweep",
    "GroundTruth",
    "SceneSpec",
    "brute_force_count",
    "generate_scene",
    "scene_sequence",
    "InstanceMap",
    "MarkerSet",
    "WatershedParams",
    "detect_markers",
    "split_all",
    "split_boundaries",
    "watershed_split",
]
