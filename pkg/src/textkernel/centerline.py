"""Center-line extraction from kernel regions.

Three stages: pick inscribed-circle centers off the distance map, order
them into a polyline, extend the two ends out to the region boundary.
Points are (x, y); radii are the inscribed-circle radii at the points.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateLine, EmptyRegion, ShapeMismatch
from .raster import (
    as_mask,
    contour_length,
    euclidean_distance_transform_squared,
    trace_contour,
)

__all__ = [
    "CenterLine",
    "generate_center_points",
    "reorder_center_points",
    "extend_center_line",
    "extract_center_line",
]

SUPPRESS_MULT = 4.0  # suppression radius in units of min_r


@dataclass
class CenterLine:
    """Ordered center points with inscribed radii.

    points : (n, 2) float64 array of (x, y)
    radii : (n,) float64 array, radii > 0
    min_r : area / perimeter of the source contour
    """

    points: np.ndarray
    radii: np.ndarray
    min_r: float

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=np.float64).reshape(-1, 2)
        self.radii = np.asarray(self.radii, dtype=np.float64).reshape(-1)
        if len(self.points) != len(self.radii):
            raise ShapeMismatch(
                f"{len(self.points)} points vs {len(self.radii)} radii"
            )
        if len(self.points) < 1:
            raise DegenerateLine("center-line needs at least one point")
        self.min_r = float(self.min_r)

    def __len__(self):
        return len(self.points)

    def arc_lengths(self) -> np.ndarray:
        """Cumulative arc length per point, starting at 0."""
        steps = np.hypot(*np.diff(self.points, axis=0).T)
        return np.concatenate([[0.0], np.cumsum(steps)])

    def to_dict(self) -> dict:
        return {
            "min_r": self.min_r,
            "points": [
                {"x": float(x), "y": float(y), "r": float(r)}
                for (x, y), r in zip(self.points, self.radii)
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CenterLine":
        pts = [(p["x"], p["y"]) for p in data["points"]]
        rad = [p["r"] for p in data["points"]]
        return cls(np.array(pts, dtype=np.float64).reshape(-1, 2),
                   np.array(rad, dtype=np.float64), data["min_r"])

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_json(cls, text: str) -> "CenterLine":
        return cls.from_dict(json.loads(text))


def generate_center_points(region, suppress_mult: float = SUPPRESS_MULT):
    """Greedy inscribed-circle center picking.

    min_r is the region's pixel-count area over its traced-contour length.
    While the largest remaining distance exceeds min_r, the max-distance
    pixel (row-major first on ties) becomes a center with that radius and
    every pixel within suppress_mult * min_r of it has its distance zeroed.

    Returns (points (n, 2), radii (n,), min_r); n may be 0 for slivers.
    """
    mask = as_mask(region)
    if not mask.any():
        raise EmptyRegion("region has no foreground pixels")
    area = float(mask.sum())
    perimeter = contour_length(trace_contour(mask))
    min_r = area / perimeter

    sq = euclidean_distance_transform_squared(mask)
    dist = np.sqrt(sq.astype(np.float64))
    h, w = mask.shape
    yy, xx = np.mgrid[0:h, 0:w]
    cutoff = suppress_mult * min_r

    points, radii = [], []
    while True:
        flat = int(np.argmax(dist))
        dmax = float(dist.flat[flat])
        if dmax <= min_r:
            break
        y, x = divmod(flat, w)
        points.append((float(x), float(y)))
        radii.append(dmax)
        gap = np.sqrt(((yy - y) ** 2 + (xx - x) ** 2).astype(np.float64))
        dist[gap < cutoff] = 0.0

    return (
        np.array(points, dtype=np.float64).reshape(-1, 2),
        np.array(radii, dtype=np.float64),
        min_r,
    )


def reorder_center_points(points, radii, min_r: float) -> CenterLine:
    """Order unsorted centers into a polyline.

    Seeded with the first two points; each further point is prepended when
    it lies beyond the head, appended when beyond the tail, and otherwise
    inserted between the consecutive pair whose detour cost
    d(p, a) + d(p, b) - d(a, b) is smallest.  The list is reversed at the
    end if the head's abscissa exceeds the tail's.
    """
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    rad = np.asarray(radii, dtype=np.float64).reshape(-1)
    if len(pts) != len(rad):
        raise ShapeMismatch(f"{len(pts)} points vs {len(rad)} radii")
    if len(pts) == 0:
        raise DegenerateLine("cannot order an empty point set")
    if len(pts) == 1:
        return CenterLine(pts.copy(), rad.copy(), min_r)

    def d(i: int, j: int) -> float:
        return float(np.hypot(pts[i, 0] - pts[j, 0], pts[i, 1] - pts[j, 1]))

    order = [0, 1]
    for i in range(2, len(pts)):
        left_d = d(i, order[0])
        right_d = d(i, order[-1])
        lr_d = d(order[0], order[-1])
        if right_d > lr_d and right_d > left_d:
            order.insert(0, i)
        elif left_d > lr_d and right_d < left_d:
            order.append(i)
        else:
            costs = [
                d(i, order[j - 1]) + d(i, order[j]) - d(order[j - 1], order[j])
                for j in range(1, len(order))
            ]
            order.insert(1 + int(np.argmin(costs)), i)

    if pts[order[0], 0] > pts[order[-1], 0]:
        order.reverse()
    return CenterLine(pts[order], rad[order], min_r)


def _march_out(p, u, mask) -> float | None:
    """Largest ray parameter t with p + t*u still inside the mask.

    Unit steps to bracket the exit, then bisection.  None when the first
    step already leaves the region.
    """
    h, w = mask.shape

    def inside(t: float) -> bool:
        x = p[0] + t * u[0]
        y = p[1] + t * u[1]
        xi, yi = int(round(x)), int(round(y))
        return 0 <= xi < w and 0 <= yi < h and bool(mask[yi, xi])

    if not inside(0.0) or not inside(1.0):
        return None
    t = 1.0
    limit = float(h + w)
    while t < limit and inside(t + 1.0):
        t += 1.0
    lo, hi = t, t + 1.0
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        if inside(mid):
            lo = mid
        else:
            hi = mid
    return lo


def extend_center_line(line: CenterLine, region) -> CenterLine:
    """Add one point past each end, pushed to the region boundary.

    The ray leaves the endpoint along the direction from its neighbor and
    stops at the last contiguous in-region position; the new point carries
    the endpoint's radius.  Lines with fewer than 2 points come back as-is,
    as do ends whose first step already exits the region.
    """
    if len(line) < 2:
        return line
    mask = as_mask(region)
    pts = line.points
    rad = line.radii

    new_pts = [pts]
    new_rad = [rad]
    head_dir = pts[0] - pts[1]
    tail_dir = pts[-1] - pts[-2]
    for which, vec in (("head", head_dir), ("tail", tail_dir)):
        norm = float(np.hypot(vec[0], vec[1]))
        if norm == 0.0:
            continue
        u = vec / norm
        p = pts[0] if which == "head" else pts[-1]
        t = _march_out(p, u, mask)
        if t is None:
            continue
        ext = (p + t * u).reshape(1, 2)
        r = rad[0] if which == "head" else rad[-1]
        if which == "head":
            new_pts.insert(0, ext)
            new_rad.insert(0, np.array([r]))
        else:
            new_pts.append(ext)
            new_rad.append(np.array([r]))
    return CenterLine(np.vstack(new_pts), np.concatenate(new_rad), line.min_r)


def extract_center_line(region, suppress_mult: float = SUPPRESS_MULT):
    """generate -> reorder -> extend in one call.

    Returns None when the region is too thin to yield any center point.
    """
    pts, rad, min_r = generate_center_points(region, suppress_mult)
    if len(pts) == 0:
        return None
    line = reorder_center_points(pts, rad, min_r)
    return extend_center_line(line, region)
