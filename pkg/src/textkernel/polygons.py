"""Vector polygon support: area, perimeter, shrink, enclosing rectangle, IOU.

Polygons are (n, 2) float arrays of (x, y) vertices, implicitly closed.
The canonical orientation is positive shoelace area (counter-clockwise in
the raster frame used throughout the package).
"""

from __future__ import annotations

import numpy as np

from .errors import DegeneratePolygon, ZeroPerimeter
from .raster import euclidean_distance_transform

__all__ = [
    "as_polygon",
    "signed_area",
    "ensure_ccw",
    "is_simple",
    "validate_polygon",
    "area_perimeter",
    "shrink_offset",
    "rasterize_polygon",
    "shrink_polygon",
    "convex_hull",
    "smallest_enclosing_rectangle",
    "polygon_iou",
]


def as_polygon(vertices) -> np.ndarray:
    """Coerce to an (n, 2) float array, n >= 3."""
    poly = np.asarray(vertices, dtype=np.float64)
    if poly.ndim != 2 or poly.shape[1] != 2:
        raise DegeneratePolygon(f"polygon must be (n, 2), got shape {poly.shape}")
    if len(poly) < 3:
        raise DegeneratePolygon(f"polygon needs >= 3 vertices, got {len(poly)}")
    if not np.isfinite(poly).all():
        raise DegeneratePolygon("polygon has non-finite vertices")
    return poly


def signed_area(poly) -> float:
    poly = np.asarray(poly, dtype=np.float64)
    x, y = poly[:, 0], poly[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def ensure_ccw(poly) -> np.ndarray:
    """Return the polygon with positive signed area (reversed if needed)."""
    poly = as_polygon(poly)
    if signed_area(poly) < 0:
        return poly[::-1].copy()
    return poly


def _segments_cross(p1, p2, q1, q2) -> bool:
    """Proper intersection test between open segments p1p2 and q1q2."""

    def orient(a, b, c):
        v = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
        if v > 1e-12:
            return 1
        if v < -1e-12:
            return -1
        return 0

    o1 = orient(p1, p2, q1)
    o2 = orient(p1, p2, q2)
    o3 = orient(q1, q2, p1)
    o4 = orient(q1, q2, p2)
    return o1 != o2 and o3 != o4 and 0 not in (o1, o2, o3, o4)


def is_simple(poly) -> bool:
    """O(n^2) pairwise check that no two non-adjacent edges cross."""
    poly = as_polygon(poly)
    n = len(poly)
    for i in range(n):
        a1, a2 = poly[i], poly[(i + 1) % n]
        for j in range(i + 1, n):
            if j == i or (j + 1) % n == i or (i + 1) % n == j:
                continue  # shared endpoint
            b1, b2 = poly[j], poly[(j + 1) % n]
            if _segments_cross(a1, a2, b1, b2):
                return False
    return True


def validate_polygon(poly, check_simple: bool = False) -> np.ndarray:
    """Full validation: shape, non-zero area, optional simplicity."""
    poly = as_polygon(poly)
    if signed_area(poly) == 0.0:
        raise DegeneratePolygon("polygon has zero area")
    if check_simple and not is_simple(poly):
        raise DegeneratePolygon("polygon is self-intersecting")
    return poly


def area_perimeter(poly) -> tuple[float, float]:
    """Shoelace area (absolute) and Euclidean edge-length sum."""
    poly = as_polygon(poly)
    area = abs(signed_area(poly))
    if area == 0.0:
        raise DegeneratePolygon("polygon has zero area")
    edges = np.roll(poly, -1, axis=0) - poly
    perimeter = float(np.hypot(edges[:, 0], edges[:, 1]).sum())
    return area, perimeter


def shrink_offset(area: float, perimeter: float, r: float = 0.6) -> float:
    """Inward clip distance d = A(1 - r^2) / L."""
    if not 0.0 < r <= 1.0:
        raise ValueError(f"shrink ratio must be in (0, 1], got {r}")
    if perimeter <= 0.0:
        raise ZeroPerimeter(f"perimeter must be positive, got {perimeter}")
    return area * (1.0 - r * r) / perimeter


def rasterize_polygon(poly, shape=None, origin=(0.0, 0.0), cell: float = 1.0):
    """Even-odd rasterization sampled at pixel centers.

    Pixel (j, i) samples the point origin + (i + 0.5, j + 0.5) * cell.
    Crossings are counted half-open in y, strict in x, so boundary pixels
    resolve deterministically.  With shape omitted the grid covers the
    polygon's bounding box from the given origin.
    """
    poly = as_polygon(poly)
    ox, oy = float(origin[0]), float(origin[1])
    if shape is None:
        nx = int(np.ceil((poly[:, 0].max() - ox) / cell))
        ny = int(np.ceil((poly[:, 1].max() - oy) / cell))
        shape = (max(ny, 1), max(nx, 1))
    h, w = int(shape[0]), int(shape[1])
    X, Y = np.meshgrid(
        ox + (np.arange(w) + 0.5) * cell, oy + (np.arange(h) + 0.5) * cell
    )
    inside = np.zeros((h, w), dtype=bool)
    x1, y1 = poly[:, 0], poly[:, 1]
    x2, y2 = np.roll(x1, -1), np.roll(y1, -1)
    for i in range(len(poly)):
        if y1[i] == y2[i]:
            continue  # horizontal edge never crosses a scan level half-open
        crosses = (y1[i] <= Y) != (y2[i] <= Y)
        xint = x1[i] + (Y - y1[i]) * (x2[i] - x1[i]) / (y2[i] - y1[i])
        inside ^= crosses & (xint > X)
    return inside


def shrink_polygon(poly, r: float = 0.6, shape=None):
    """Shrunken kernel label: rasterize, then keep pixels deeper than d.

    d comes from the vector area and perimeter; depth is the raster interior
    EDT.  An empty mask is a legal result for thin regions.
    """
    poly = as_polygon(poly)
    area, perimeter = area_perimeter(poly)
    d = shrink_offset(area, perimeter, r)
    mask = rasterize_polygon(poly, shape=shape)
    if not mask.any():
        return mask
    dist = euclidean_distance_transform(mask)
    return dist > d


def convex_hull(points) -> np.ndarray:
    """Monotone-chain hull, counter-clockwise, no interior collinear points."""
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    if len(pts) == 0:
        raise ValueError("need at least one point")
    pts = np.unique(pts, axis=0)  # sorts lexicographically
    if len(pts) == 1:
        return pts

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    def build(seq):
        out = []
        for p in seq:
            while len(out) >= 2 and cross(out[-2], out[-1], p) <= 0:
                out.pop()
            out.append(p)
        return out

    lower = build(pts)
    upper = build(pts[::-1])
    hull = np.array(lower[:-1] + upper[:-1])
    if len(hull) == 0:  # all points identical handled above; collinear -> 2
        hull = pts[[0, -1]]
    return hull


def smallest_enclosing_rectangle(points) -> np.ndarray:
    """Minimum-area oriented bounding rectangle via rotating calipers.

    Returns 4 vertices, positively oriented.  Collinear input degenerates
    to a zero-height rectangle along the segment.
    """
    hull = convex_hull(points)
    if len(hull) == 1:
        return np.repeat(hull, 4, axis=0)
    if len(hull) == 2:
        a, b = hull
        return np.array([a, b, b, a])
    best = None
    n = len(hull)
    for i in range(n):
        edge = hull[(i + 1) % n] - hull[i]
        length = float(np.hypot(edge[0], edge[1]))
        if length == 0.0:
            continue
        u = edge / length
        v = np.array([-u[1], u[0]])
        pu = hull @ u
        pv = hull @ v
        area = (pu.max() - pu.min()) * (pv.max() - pv.min())
        if best is None or area < best[0]:
            best = (area, u, v, pu.min(), pu.max(), pv.min(), pv.max())
    _, u, v, u0, u1, v0, v1 = best
    corners = np.array([u0 * u + v0 * v, u1 * u + v0 * v, u1 * u + v1 * v, u0 * u + v1 * v])
    if signed_area(corners) < 0:
        corners = corners[::-1].copy()
    return corners


def polygon_iou(a, b, grid: float = 1.0) -> float:
    """Rasterized intersection-over-union on a shared grid.

    The grid origin is the joint bounding-box corner, so the result is
    invariant under common translation of both polygons.  Accuracy is
    bounded by the cell size `grid`.
    """
    a = as_polygon(a)
    b = as_polygon(b)
    if grid <= 0:
        raise ValueError(f"grid cell size must be positive, got {grid}")
    min_x = min(a[:, 0].min(), b[:, 0].min())
    min_y = min(a[:, 1].min(), b[:, 1].min())
    max_x = max(a[:, 0].max(), b[:, 0].max())
    max_y = max(a[:, 1].max(), b[:, 1].max())
    nx = max(1, int(np.ceil((max_x - min_x) / grid)))
    ny = max(1, int(np.ceil((max_y - min_y) / grid)))
    origin = (min_x, min_y)
    ma = rasterize_polygon(a, shape=(ny, nx), origin=origin, cell=grid)
    mb = rasterize_polygon(b, shape=(ny, nx), origin=origin, cell=grid)
    union = int((ma | mb).sum())
    if union == 0:
        return 0.0
    return int((ma & mb).sum()) / union
