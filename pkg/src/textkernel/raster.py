"""Raster primitives: binary masks, exact EDT, components, contour tracing.

Masks are 2-D numpy bool arrays indexed [row, col]; points are (x, y) pairs
with x = column and y = row.  Pixels beyond the image border count as
background, so distances stay finite even for all-foreground masks.
"""

from __future__ import annotations

import numpy as np
from PIL import Image
from scipy import ndimage

from .errors import EmptyMask

__all__ = [
    "as_mask",
    "euclidean_distance_transform",
    "euclidean_distance_transform_squared",
    "connected_components",
    "trace_contour",
    "contour_length",
    "read_mask",
    "write_mask",
    "read_image",
    "write_image",
]


def as_mask(data) -> np.ndarray:
    """Coerce array-like input to a 2-D bool mask."""
    mask = np.asarray(data)
    if mask.ndim != 2:
        raise ValueError(f"mask must be 2-D, got shape {mask.shape}")
    if mask.shape[0] < 1 or mask.shape[1] < 1:
        raise ValueError("mask must be at least 1x1")
    return mask.astype(bool)


def _edt_1d_squared(f: np.ndarray) -> np.ndarray:
    """Lower-envelope pass: d[x] = min_k (x-k)^2 + f[k], exact in int64."""
    n = len(f)
    d = np.empty(n, dtype=np.int64)
    v = np.empty(n, dtype=np.int64)  # parabola sites
    z = np.empty(n + 1, dtype=np.float64)  # envelope breakpoints
    k = 0
    v[0] = 0
    z[0] = -np.inf
    z[1] = np.inf
    for q in range(1, n):
        fq = f[q] + q * q
        while True:
            p = v[k]
            s = (fq - (f[p] + p * p)) / (2 * (q - p))
            if s <= z[k]:
                k -= 1
            else:
                break
        k += 1
        v[k] = q
        z[k] = s
        z[k + 1] = np.inf
    k = 0
    for x in range(n):
        while z[k + 1] < x:
            k += 1
        p = v[k]
        d[x] = (x - p) ** 2 + f[p]
    return d


def euclidean_distance_transform_squared(mask) -> np.ndarray:
    """Exact squared Euclidean distance to the nearest background pixel.

    Out-of-bounds pixels are background: the mask is padded with a one-pixel
    background ring before the two-pass transform, so every column sees a
    background pixel and all distances are finite integers.
    """
    mask = as_mask(mask)
    h, w = mask.shape
    padded = np.zeros((h + 2, w + 2), dtype=bool)
    padded[1:-1, 1:-1] = mask

    # Pass 1: per-column distance (in rows) to the nearest background pixel.
    big = h + w + 4
    g = np.where(padded, big, 0).astype(np.int64)
    for y in range(1, h + 2):
        row = g[y]
        np.minimum(row, g[y - 1] + 1, out=row)
    for y in range(h, -1, -1):
        row = g[y]
        np.minimum(row, g[y + 1] + 1, out=row)

    # Pass 2: per-row lower envelope over squared column offsets.
    g2 = g * g
    out = np.empty_like(g2)
    for y in range(h + 2):
        out[y] = _edt_1d_squared(g2[y])
    return out[1:-1, 1:-1]


def euclidean_distance_transform(mask) -> np.ndarray:
    """Exact Euclidean distance map (float); 0 on background."""
    return np.sqrt(euclidean_distance_transform_squared(mask).astype(np.float64))


_EIGHT = np.ones((3, 3), dtype=int)


def connected_components(mask) -> list[np.ndarray]:
    """Split a mask into 8-connected foreground components, one mask each."""
    mask = as_mask(mask)
    labels, count = ndimage.label(mask, structure=_EIGHT)
    return [labels == i for i in range(1, count + 1)]


def label_components(mask):
    """Labeled array plus per-component bounding-box slices (row-major order)."""
    mask = as_mask(mask)
    labels, count = ndimage.label(mask, structure=_EIGHT)
    slices = ndimage.find_objects(labels)
    return labels, count, slices


# Moore neighbourhood in clockwise order starting East, as (dx, dy).
_MOORE = [(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)]


def trace_contour(component) -> np.ndarray:
    """Trace the closed outer boundary of a single 8-connected region.

    Moore-neighbour walk.  Returns an (n, 2) array of (x, y) pixel
    coordinates with non-negative shoelace area (counter-clockwise under
    the raster convention used throughout).  A single-pixel region
    degenerates to the four corners of its unit pixel square.  On shapes
    with one-pixel-wide protrusions the walk passes a pixel once per side,
    so points may repeat; consecutive points stay 8-adjacent and the walk
    is closed.
    """
    mask = as_mask(component)
    ys, xs = np.nonzero(mask)
    if len(ys) == 0:
        raise EmptyMask("cannot trace contour of an empty mask")
    if len(ys) == 1:
        x, y = int(xs[0]), int(ys[0])
        return np.array(
            [[x, y], [x + 1, y], [x + 1, y + 1], [x, y + 1]], dtype=np.int64
        )

    h, w = mask.shape

    def fg(x, y):
        return 0 <= x < w and 0 <= y < h and mask[y, x]

    # First foreground pixel in row-major order; its West neighbour is
    # guaranteed background, so the walk backtracks West initially.
    sy = int(ys.min())
    start = (int(xs[ys == sy].min()), sy)

    points = []
    cur = start
    backtrack = 4  # index of West in _MOORE
    first_state = None
    limit = 4 * len(ys) + 8
    while len(points) <= limit:
        for i in range(1, 9):
            d = (backtrack + i) % 8
            dx, dy = _MOORE[d]
            if fg(cur[0] + dx, cur[1] + dy):
                break
        state = (cur, d)
        if first_state is None:
            first_state = state
        elif state == first_state:
            break  # same pixel left in the same direction: cycle closed
        points.append(cur)
        cur = (cur[0] + dx, cur[1] + dy)
        backtrack = (d + 4) % 8
    return _orient_ccw(np.array(points, dtype=np.int64))


def _orient_ccw(points: np.ndarray) -> np.ndarray:
    x, y = points[:, 0], points[:, 1]
    area2 = np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))
    if area2 < 0:
        return points[::-1].copy()
    return points


def contour_length(points: np.ndarray) -> float:
    """Closed polyline length of a traced contour."""
    pts = np.asarray(points, dtype=np.float64)
    diffs = np.roll(pts, -1, axis=0) - pts
    return float(np.hypot(diffs[:, 0], diffs[:, 1]).sum())


# ---------------------------------------------------------------------------
# File formats: PGM (P5, maxval 255) and 8-bit grayscale PNG.
# ---------------------------------------------------------------------------


def _read_pgm(path) -> np.ndarray:
    with open(path, "rb") as fh:
        data = fh.read()
    if not data.startswith(b"P5"):
        raise ValueError(f"{path}: not a binary PGM (P5) file")
    # Header: magic, width, height, maxval, separated by whitespace/comments.
    fields = []
    pos = 2
    while len(fields) < 3:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos : pos + 1] != b"\n":
                pos += 1
            continue
        token = b""
        while pos < len(data) and not data[pos : pos + 1].isspace():
            token += data[pos : pos + 1]
            pos += 1
        fields.append(int(token))
    pos += 1  # single whitespace after maxval
    width, height, maxval = fields
    if maxval > 255:
        raise ValueError(f"{path}: 16-bit PGM not supported")
    pixels = np.frombuffer(data, dtype=np.uint8, count=width * height, offset=pos)
    return pixels.reshape(height, width)


def _write_pgm(path, gray: np.ndarray) -> None:
    h, w = gray.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(gray.astype(np.uint8).tobytes())


def read_mask(path) -> np.ndarray:
    """Read a PGM/PNG file as a bool mask (threshold at 128)."""
    path = str(path)
    if path.lower().endswith(".pgm"):
        gray = _read_pgm(path)
    else:
        gray = np.asarray(Image.open(path).convert("L"))
    return gray >= 128


def write_mask(path, mask) -> None:
    """Write a bool mask as PGM or PNG (foreground = 255)."""
    mask = as_mask(mask)
    gray = np.where(mask, 255, 0).astype(np.uint8)
    path = str(path)
    if path.lower().endswith(".pgm"):
        _write_pgm(path, gray)
    else:
        Image.fromarray(gray, mode="L").save(path)


def read_image(path) -> np.ndarray:
    """Read a grayscale image as float64 in [0, 1]."""
    path = str(path)
    if path.lower().endswith(".pgm"):
        gray = _read_pgm(path)
    else:
        gray = np.asarray(Image.open(path).convert("L"))
    return gray.astype(np.float64) / 255.0


def write_image(path, image) -> None:
    """Write a float image in [0, 1] as 8-bit grayscale PGM/PNG."""
    arr = np.asarray(image, dtype=np.float64)
    if arr.ndim == 3:
        if arr.shape[2] != 1:
            raise ValueError("only single-channel images can be written")
        arr = arr[:, :, 0]
    gray = np.clip(np.rint(arr * 255.0), 0, 255).astype(np.uint8)
    path = str(path)
    if path.lower().endswith(".pgm"):
        _write_pgm(path, gray)
    else:
        Image.fromarray(gray, mode="L").save(path)
