"""Geometric core of a text-kernel page spotter.

Center-line extraction from kernel masks, thin-plate-spline strip
rectification, shrunken kernel label generation, and the detection /
recognition evaluation protocol, plus a CLI wrapping the lot.
"""

__version__ = "0.1.0"

from .centerline import (
    CenterLine,
    extend_center_line,
    extract_center_line,
    generate_center_points,
    reorder_center_points,
)
from .errors import (
    DegenerateLine,
    DegeneratePolygon,
    EmptyMask,
    EmptyReference,
    EmptyRegion,
    InfeasibleLength,
    NoGroundTruth,
    OverlapDetected,
    ShapeMismatch,
    SingularSystem,
    SpecOutOfBounds,
    TextKernelError,
    ZeroPerimeter,
)
from .evaluation import (
    EvalReport,
    PageRecord,
    evaluate_pages,
    group_kernel_boxes,
    perturb_box,
    read_page_file,
    write_page_file,
)
from .metrics import (
    combined_loss,
    cr_ar,
    ctc_forward_loss,
    ctc_greedy_decode,
    dice_loss,
    levenshtein_counts,
)
from .pipeline import (
    PipelineConfig,
    SpotLine,
    make_kernel_labels,
    perturbed_boxes,
    spot_page,
)
from .polygons import (
    polygon_iou,
    shrink_offset,
    shrink_polygon,
    smallest_enclosing_rectangle,
)
from .raster import (
    euclidean_distance_transform,
    euclidean_distance_transform_squared,
    label_components,
    read_image,
    read_mask,
    trace_contour,
    write_image,
    write_mask,
)
from .synthetic import StripSpec, default_grid, render_page, render_strip
from .tps import RectifiedStrip, TpsTransform, apply_tps, fit_tps, rectify_strip

__all__ = [
    "__version__",
    "TextKernelError",
    "EmptyMask",
    "EmptyRegion",
    "DegeneratePolygon",
    "ZeroPerimeter",
    "ShapeMismatch",
    "SingularSystem",
    "DegenerateLine",
    "InfeasibleLength",
    "EmptyReference",
    "NoGroundTruth",
    "SpecOutOfBounds",
    "OverlapDetected",
    "CenterLine",
    "generate_center_points",
    "reorder_center_points",
    "extend_center_line",
    "extract_center_line",
    "euclidean_distance_transform",
    "euclidean_distance_transform_squared",
    "trace_contour",
    "label_components",
    "read_mask",
    "write_mask",
    "read_image",
    "write_image",
    "polygon_iou",
    "shrink_offset",
    "shrink_polygon",
    "smallest_enclosing_rectangle",
    "fit_tps",
    "apply_tps",
    "TpsTransform",
    "RectifiedStrip",
    "rectify_strip",
    "dice_loss",
    "combined_loss",
    "ctc_forward_loss",
    "ctc_greedy_decode",
    "levenshtein_counts",
    "cr_ar",
    "PageRecord",
    "EvalReport",
    "evaluate_pages",
    "group_kernel_boxes",
    "perturb_box",
    "read_page_file",
    "write_page_file",
    "PipelineConfig",
    "SpotLine",
    "spot_page",
    "make_kernel_labels",
    "perturbed_boxes",
    "StripSpec",
    "render_strip",
    "render_page",
    "default_grid",
]
