"""Thin-plate-spline fitting and strip rectification.

Kernel U(r) = r^2 log r (natural log, U(0) = 0) plus an affine part.  All
image sampling is index-based: pixel centers sit on integer coordinates,
and the rectified output's pixel (i, j) reads target-plane point (j, i).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .centerline import CenterLine
from .errors import DegenerateLine, ShapeMismatch, SingularSystem

__all__ = [
    "TpsTransform",
    "fit_tps",
    "apply_tps",
    "control_points_from_centerline",
    "bilinear_sample",
    "RectifiedStrip",
    "rectify_strip",
]

AUTO_REG_FACTOR = 1e-8  # of the mean squared source spread


def _kernel(r2: np.ndarray) -> np.ndarray:
    """U(r) = r^2 log r evaluated from squared radii, zero at r = 0."""
    out = np.zeros_like(r2)
    nz = r2 > 0
    out[nz] = 0.5 * r2[nz] * np.log(r2[nz])  # r^2 log r = r^2 * log(r^2)/2
    return out


@dataclass
class TpsTransform:
    """Fitted thin-plate spline: x -> affine(x) + sum_i w_i U(|x - s_i|)."""

    source_points: np.ndarray  # (n, 2)
    radial_weights: np.ndarray  # (n, 2)
    affine: np.ndarray  # (2, 3): columns are bias, x, y coefficients

    def __call__(self, points):
        return apply_tps(self, points)


def fit_tps(source, target, regularization: float | None = None) -> TpsTransform:
    """Solve the TPS interpolation system mapping source points to targets.

    regularization is added to the kernel diagonal; None picks
    1e-8 x mean squared source spread, 0 gives exact interpolation.
    Raises SingularSystem for collinear or duplicate sources when the
    system has no unique solution.
    """
    src = np.asarray(source, dtype=np.float64).reshape(-1, 2)
    tgt = np.asarray(target, dtype=np.float64).reshape(-1, 2)
    if len(src) != len(tgt):
        raise ShapeMismatch(f"{len(src)} sources vs {len(tgt)} targets")
    n = len(src)
    if n < 3:
        raise SingularSystem(f"TPS needs >= 3 point pairs, got {n}")
    if regularization is None:
        spread = src - src.mean(axis=0)
        regularization = AUTO_REG_FACTOR * float((spread**2).sum(axis=1).mean())
    if regularization < 0:
        raise ValueError(f"regularization must be >= 0, got {regularization}")

    diff = src[:, None, :] - src[None, :, :]
    d2 = (diff**2).sum(axis=2)
    if regularization == 0.0:
        # the bordered system is rank-deficient for these configurations
        # yet sometimes numerically consistent, so reject them explicitly
        off = d2 + np.diag(np.full(n, np.inf))
        if off.min() == 0.0:
            raise SingularSystem("duplicate source points")
        sv = np.linalg.svd(src - src.mean(axis=0), compute_uv=False)
        if sv[1] <= 1e-9 * max(sv[0], 1.0):
            raise SingularSystem("collinear source points")
    K = _kernel(d2)
    K[np.diag_indices(n)] += regularization
    P = np.concatenate([np.ones((n, 1)), src], axis=1)

    L = np.zeros((n + 3, n + 3))
    L[:n, :n] = K
    L[:n, n:] = P
    L[n:, :n] = P.T
    rhs = np.zeros((n + 3, 2))
    rhs[:n] = tgt
    try:
        sol = np.linalg.solve(L, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(f"TPS system is singular: {exc}") from exc
    if not np.isfinite(sol).all():
        raise SingularSystem("TPS solve produced non-finite coefficients")
    weights = sol[:n]
    affine = sol[n:].T  # (2, 3): [bias, x coef, y coef] per output coordinate
    if regularization == 0.0:
        # LAPACK only errors on exact zero pivots; collinear sources can
        # slip through with garbage coefficients, so gate on the residual.
        residual = np.abs(K @ weights + P @ sol[n:] - tgt).max()
        if residual > 1e-4 * (1.0 + np.abs(tgt).max()):
            raise SingularSystem(
                f"degenerate source configuration (residual {residual:.3g})"
            )
    return TpsTransform(src, weights, affine)


def apply_tps(t: TpsTransform, points):
    """Evaluate the transform at one point (2,) or a batch (n, 2)."""
    pts = np.asarray(points, dtype=np.float64)
    single = pts.ndim == 1
    pts = pts.reshape(-1, 2)
    diff = pts[:, None, :] - t.source_points[None, :, :]
    U = _kernel((diff**2).sum(axis=2))
    out = (
        t.affine[:, 0]
        + pts @ t.affine[:, 1:].T
        + U @ t.radial_weights
    )
    return out[0] if single else out


def control_points_from_centerline(line: CenterLine, height: int = 32):
    """Source/target control pairs for rectification.

    Sources sit at p +- r * normal for each center point (normal from the
    central-difference tangent); targets sit at (s * scale, 0) and
    (s * scale, height) where s is cumulative arc length and
    scale = (height/2) / mean radius.
    """
    pts = line.points
    rad = line.radii
    if len(pts) < 2:
        raise DegenerateLine("need >= 2 center points for control pairs")
    steps = np.diff(pts, axis=0)
    lengths = np.hypot(steps[:, 0], steps[:, 1])
    if (lengths == 0).any():
        raise DegenerateLine("coincident consecutive center points")

    # central-difference tangents, one-sided at the ends
    prev = np.vstack([pts[0], pts[:-1]])
    nxt = np.vstack([pts[1:], pts[-1]])
    tang = nxt - prev
    tnorm = np.hypot(tang[:, 0], tang[:, 1])
    if (tnorm == 0).any():
        raise DegenerateLine("zero tangent on the center-line")
    tang /= tnorm[:, None]
    normal = np.stack([tang[:, 1], -tang[:, 0]], axis=1)  # upper side (y down)

    top = pts + rad[:, None] * normal
    bottom = pts - rad[:, None] * normal
    source = np.vstack([top, bottom])

    arcs = line.arc_lengths()
    scale = (height / 2.0) / float(rad.mean())
    xs = arcs * scale
    target = np.vstack(
        [
            np.stack([xs, np.zeros_like(xs)], axis=1),
            np.stack([xs, np.full_like(xs, float(height))], axis=1),
        ]
    )
    return source, target


def bilinear_sample(image, xs, ys):
    """Bilinear interpolation at index coordinates; outside the image -> 0.

    image may be (h, w) or (h, w, c); the output matches xs's shape with a
    trailing channel axis for multi-channel input.
    """
    img = np.asarray(image, dtype=np.float64)
    squeeze = img.ndim == 2
    if squeeze:
        img = img[:, :, None]
    h, w, c = img.shape
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    x0 = np.floor(xs)
    y0 = np.floor(ys)
    fx = xs - x0
    fy = ys - y0
    x0 = x0.astype(np.int64)
    y0 = y0.astype(np.int64)
    out = np.zeros(xs.shape + (c,), dtype=np.float64)
    for dy in (0, 1):
        for dx in (0, 1):
            xi = x0 + dx
            yi = y0 + dy
            weight = (fx if dx else 1.0 - fx) * (fy if dy else 1.0 - fy)
            valid = (xi >= 0) & (xi < w) & (yi >= 0) & (yi < h)
            vals = img[yi.clip(0, h - 1), xi.clip(0, w - 1)]
            out += (weight * valid)[..., None] * vals
    return out[..., 0] if squeeze else out


@dataclass
class RectifiedStrip:
    """Fixed-height rectified strip; data is (height, width, channels)."""

    height: int
    width: int
    channels: int
    data: np.ndarray

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.float64)
        if self.data.ndim == 2:
            self.data = self.data[:, :, None]
        if self.data.shape != (self.height, self.width, self.channels):
            raise ShapeMismatch(
                f"strip data {self.data.shape} vs declared "
                f"({self.height}, {self.width}, {self.channels})"
            )

    @property
    def gray(self) -> np.ndarray:
        """Single-channel view as (height, width)."""
        if self.channels != 1:
            raise ShapeMismatch(f"strip has {self.channels} channels")
        return self.data[:, :, 0]

    def save(self, path) -> None:
        """PNG for .png paths (single channel), else raw float64 + sidecar."""
        path = Path(path)
        if path.suffix.lower() == ".png":
            from .raster import write_image

            write_image(path, self.gray)
        else:
            path.write_bytes(self.data.astype(np.float64).tobytes())
            sidecar = path.with_suffix(path.suffix + ".json")
            sidecar.write_text(
                json.dumps(
                    {
                        "height": self.height,
                        "width": self.width,
                        "channels": self.channels,
                    }
                )
            )

    @classmethod
    def load(cls, path) -> "RectifiedStrip":
        path = Path(path)
        if path.suffix.lower() == ".png":
            from .raster import read_image

            data = read_image(path)
            h, w = data.shape
            return cls(h, w, 1, data)
        meta = json.loads(path.with_suffix(path.suffix + ".json").read_text())
        data = np.frombuffer(path.read_bytes(), dtype=np.float64).reshape(
            meta["height"], meta["width"], meta["channels"]
        )
        return cls(meta["height"], meta["width"], meta["channels"], data.copy())


def rectify_strip(image, line: CenterLine, height: int = 32) -> RectifiedStrip:
    """Warp a curved strip into a height-pixel-tall rectangle.

    Fits the inverse (target -> source) spline on the control pairs and
    samples the image bilinearly over the target grid; samples falling
    outside the image are 0.  Width is the center-line arc length times
    (height/2) / mean radius, rounded, at least 1.
    """
    source, target = control_points_from_centerline(line, height)
    inverse = fit_tps(target, source)
    scale = (height / 2.0) / float(line.radii.mean())
    width = max(1, int(round(float(line.arc_lengths()[-1]) * scale)))

    jj, ii = np.meshgrid(np.arange(width), np.arange(height))
    grid = np.stack([jj.ravel(), ii.ravel()], axis=1).astype(np.float64)
    src = inverse(grid)
    img = np.asarray(image, dtype=np.float64)
    sampled = bilinear_sample(img, src[:, 0], src[:, 1])
    if sampled.ndim == 1:
        data = sampled.reshape(height, width, 1)
    else:
        data = sampled.reshape(height, width, -1)
    return RectifiedStrip(height, width, data.shape[2], data)
