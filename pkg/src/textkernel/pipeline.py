"""Page-level spotting: components to center lines, boxes, and strips.

Each connected component is processed independently (optionally in a
thread pool): center points, ordering, endpoint extension, then strip
rectification against the page image.  Components are emitted sorted by
bounding-box leftmost-x, ties broken by top-y, so output order is
deterministic regardless of worker count.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .centerline import (
    CenterLine,
    extend_center_line,
    generate_center_points,
    reorder_center_points,
)
from .errors import ShapeMismatch
from .evaluation import perturb_box
from .polygons import shrink_polygon, smallest_enclosing_rectangle
from .raster import as_mask, contour_length, label_components, trace_contour
from .tps import RectifiedStrip, rectify_strip

__all__ = [
    "PipelineConfig",
    "SpotLine",
    "spot_page",
    "make_kernel_labels",
    "perturbed_boxes",
    "downscale_mask",
    "downscale_image",
]

log = logging.getLogger("textkernel.pipeline")


@dataclass
class PipelineConfig:
    """Tunables shared by the library pipeline and the command line."""

    r: float = 0.6  # kernel shrink ratio
    height: int = 32  # rectified strip height
    suppress_mult: float = 4.0  # suppression radius, in units of min_r
    iou_grid: float = 1.0  # rasterization cell for polygon IOU
    amp_h: float = 1.0  # horizontal box perturbation amplitude
    amp_v: float = 0.2  # vertical box perturbation amplitude
    seed: int | None = None
    jobs: int = 1
    downscale4: bool = False

    def __post_init__(self):
        if not 0.0 < self.r <= 1.0:
            raise ValueError(f"r must be in (0, 1], got {self.r}")
        if self.height < 2:
            raise ValueError(f"height must be >= 2, got {self.height}")
        if self.suppress_mult <= 0:
            raise ValueError(f"suppress_mult must be positive, got {self.suppress_mult}")
        if self.iou_grid <= 0:
            raise ValueError(f"iou_grid must be positive, got {self.iou_grid}")
        if self.jobs < 1:
            raise ValueError(f"jobs must be >= 1, got {self.jobs}")


@dataclass
class SpotLine:
    """One recovered text line: geometry plus the rectified strip."""

    index: int
    line: CenterLine
    polygon: np.ndarray  # (4, 2) smallest enclosing rectangle
    strip: RectifiedStrip


def downscale_mask(mask: np.ndarray) -> np.ndarray:
    """Quarter-resolution mask: a block is set when any source pixel is."""
    m = as_mask(mask)
    h, w = m.shape
    ph, pw = -h % 4, -w % 4
    m = np.pad(m, ((0, ph), (0, pw)))
    return m.reshape(m.shape[0] // 4, 4, m.shape[1] // 4, 4).any(axis=(1, 3))


def downscale_image(image: np.ndarray) -> np.ndarray:
    """Quarter-resolution image by 4x4 block averaging."""
    img = np.asarray(image, dtype=np.float64)
    h, w = img.shape
    ph, pw = -h % 4, -w % 4
    img = np.pad(img, ((0, ph), (0, pw)))
    return img.reshape(img.shape[0] // 4, 4, img.shape[1] // 4, 4).mean(axis=(1, 3))


def _component_line(crop: np.ndarray, offset, scale: float, config: PipelineConfig):
    """Extract an extended center line for one cropped component.

    Returns (CenterLine, None) in page coordinates, or (None, reason).
    """
    area = float(crop.sum())
    contour = trace_contour(crop)
    min_r = area / contour_length(contour)
    if area < 4.0 * min_r * min_r:
        return None, f"area {area:.0f} below 4*min_r^2 ({4 * min_r * min_r:.1f})"
    points, radii, min_r = generate_center_points(crop, config.suppress_mult)
    if len(points) == 0:
        return None, "no center points above min_r"
    if len(points) == 1:
        return None, "single center point, direction undefined"
    line = reorder_center_points(points, radii, min_r)
    line = extend_center_line(line, crop)
    pts = np.asarray(line.points) + np.asarray(offset, dtype=np.float64)
    radii = np.asarray(line.radii)
    if scale != 1.0:
        # block centers of the downscaled grid sit at 4k + 1.5 in page pixels
        pts = pts * scale + (scale - 1.0) / 2.0
        radii = radii * scale
        min_r = min_r * scale
    return CenterLine(points=pts, radii=radii, min_r=min_r), None


def spot_page(mask, image=None, config: PipelineConfig | None = None):
    """Spot text lines on a page mask.

    Returns (lines, skipped): SpotLine records in reading order and dicts
    describing components that were dropped (too small, or too compact to
    orient).  Rectification always samples the full-resolution image, even
    when detection runs on the quarter-scale mask.
    """
    config = config or PipelineConfig()
    mask = as_mask(mask)
    if image is None:
        image = mask.astype(np.float64)
    else:
        image = np.asarray(image, dtype=np.float64)
        if image.shape != mask.shape:
            raise ShapeMismatch(
                f"image shape {image.shape} does not match mask {mask.shape}"
            )

    work = downscale_mask(mask) if config.downscale4 else mask
    scale = 4.0 if config.downscale4 else 1.0
    labels, count, slices = label_components(work)

    items = []
    for k in range(1, count + 1):
        sly, slx = slices[k - 1]
        items.append((slx.start, sly.start, k, sly, slx))
    items.sort(key=lambda it: (it[0], it[1]))

    def run(item):
        x0, y0, k, sly, slx = item
        crop = np.pad(labels[sly, slx] == k, 2)
        line, reason = _component_line(crop, (slx.start - 2, sly.start - 2), scale, config)
        if line is None:
            return None, {
                "component": k,
                "bbox": [slx.start, sly.start, slx.stop, sly.stop],
                "reason": reason,
            }
        ys, xs = np.nonzero(crop)
        pts = np.stack([xs + (slx.start - 2), ys + (sly.start - 2)], axis=1).astype(
            np.float64
        )
        if scale != 1.0:
            pts = pts * scale + (scale - 1.0) / 2.0
        polygon = smallest_enclosing_rectangle(pts)
        strip = rectify_strip(image, line, config.height)
        return (line, polygon, strip), None

    if config.jobs > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=config.jobs) as pool:
            results = list(pool.map(run, items))
    else:
        results = [run(it) for it in items]

    lines, skipped = [], []
    for item, (good, bad) in zip(items, results):
        if good is None:
            log.warning(
                "skipping component %d at %s: %s", bad["component"], bad["bbox"], bad["reason"]
            )
            skipped.append(bad)
            continue
        line, polygon, strip = good
        lines.append(SpotLine(index=len(lines), line=line, polygon=polygon, strip=strip))
    return lines, skipped


def make_kernel_labels(boxes, shape, r: float = 0.6) -> np.ndarray:
    """Union of shrunk ground-truth boxes rasterized onto one mask."""
    out = np.zeros(shape, dtype=bool)
    for box in boxes:
        out |= shrink_polygon(np.asarray(box, dtype=np.float64), r, shape=shape)
    return out


def perturbed_boxes(boxes, amp_v: float, amp_h: float, seed=None) -> list:
    """Perturb every box with one shared generator; a fixed seed fixes all."""
    rng = np.random.default_rng(seed)
    return [perturb_box(np.asarray(b, dtype=np.float64), amp_v, amp_h, rng) for b in boxes]
