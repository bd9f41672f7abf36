"""Synthetic strips and pages with exactly known medial lines.

Strips are bands of half_height signed perpendicular distance around a
sinusoidal spine, with flat ends cut along the end normals.  Textures are
painted in strip-intrinsic (arc length, offset) coordinates so bars stay
perpendicular to the spine however the strip bends.  Everything is a pure
function of the spec: no randomness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import OverlapDetected, SpecOutOfBounds
from .polygons import smallest_enclosing_rectangle

__all__ = [
    "StripSpec",
    "render_strip",
    "SyntheticPage",
    "render_page",
    "default_grid",
]

TEXTURES = ("constant", "bars", "checker")

PAD = 4  # background border around each strip canvas
LINE_DS = 0.5  # spine sample spacing for the reported centerline
DIST_DS = 2.0  # coarser spacing for the distance field
EDGE = 1.5  # texture edge transition width, px


def _square_wave(u, width):
    """Soft square wave of period 2*width: +1 on [0, width), -1 after.

    Edges ramp linearly over EDGE px so the raster keeps subpixel edge
    positions as intensity instead of a hard pixel staircase.
    """
    d = width / 2.0 - np.abs(np.mod(u, 2.0 * width) - width / 2.0)
    return np.clip(d / (EDGE / 2.0), -1.0, 1.0)


@dataclass
class StripSpec:
    """Geometry and texture of one synthetic strip."""

    length: float
    half_height: float
    amplitude: float = 0.0
    period: float = 200.0
    rotation: float = 0.0  # degrees
    texture: str = "constant"
    bar_width: float = 6.0

    def __post_init__(self):
        if self.half_height < 2:
            raise SpecOutOfBounds(f"half_height must be >= 2, got {self.half_height}")
        if self.period <= 0:
            raise SpecOutOfBounds(f"period must be positive, got {self.period}")
        if self.length < 4 * self.half_height:
            raise SpecOutOfBounds(
                f"length {self.length} below 4 x half_height {self.half_height}"
            )
        if self.texture not in TEXTURES:
            raise SpecOutOfBounds(
                f"texture must be one of {TEXTURES}, got {self.texture!r}"
            )
        if self.bar_width <= 0:
            raise SpecOutOfBounds(f"bar_width must be positive, got {self.bar_width}")

    def to_dict(self) -> dict:
        return {
            "length": self.length,
            "half_height": self.half_height,
            "amplitude": self.amplitude,
            "period": self.period,
            "rotation": self.rotation,
            "texture": self.texture,
            "bar_width": self.bar_width,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "StripSpec":
        known = {k: data[k] for k in cls.__dataclass_fields__ if k in data}
        return cls(**known)


def _spine(spec: StripSpec, ds: float) -> np.ndarray:
    ts = np.arange(0.0, spec.length + ds / 2, ds)
    ts[-1] = min(ts[-1], spec.length)
    ys = spec.amplitude * np.sin(2 * np.pi * ts / spec.period)
    pts = np.stack([ts, ys], axis=1)
    th = math.radians(spec.rotation)
    rot = np.array([[math.cos(th), -math.sin(th)], [math.sin(th), math.cos(th)]])
    return pts @ rot.T


def render_strip(spec: StripSpec):
    """Render one strip.

    Returns (mask, centerline, image): a bool canvas, dense spine samples
    (trimmed one pixel at each end so every sample is strictly interior),
    and the texture clipped to the mask.  The band is the signed offset
    range [-half_height, half_height) measured against the spine, cut flat
    along the normals at both spine ends.
    """
    dense = _spine(spec, LINE_DS)
    offset = PAD + spec.half_height - dense.min(axis=0)
    dense = dense + offset
    hi = dense.max(axis=0) + spec.half_height + PAD
    w, h = int(math.ceil(hi[0])) + 1, int(math.ceil(hi[1])) + 1

    step = max(1, int(round(DIST_DS / LINE_DS)))
    coarse = dense[::step]
    if not np.array_equal(coarse[-1], dense[-1]):
        coarse = np.vstack([coarse, dense[-1]])

    X, Y = np.meshgrid(np.arange(w, dtype=np.float64), np.arange(h, dtype=np.float64))
    best_d2 = np.full((h, w), np.inf)
    best_s = np.zeros((h, w))
    best_v = np.zeros((h, w))
    seg_len = np.hypot(*np.diff(coarse, axis=0).T)
    arc0 = np.concatenate([[0.0], np.cumsum(seg_len)])
    for i in range(len(coarse) - 1):
        a = coarse[i]
        ab = coarse[i + 1] - a
        L2 = float(ab @ ab)
        if L2 == 0.0:
            continue
        px = X - a[0]
        py = Y - a[1]
        t = np.clip((px * ab[0] + py * ab[1]) / L2, 0.0, 1.0)
        dx = px - t * ab[0]
        dy = py - t * ab[1]
        d2 = dx * dx + dy * dy
        better = d2 < best_d2
        if better.any():
            best_d2[better] = d2[better]
            best_s[better] = arc0[i] + t[better] * seg_len[i]
            # signed offset against the segment normal (left of travel < 0)
            nrm = math.sqrt(L2)
            best_v[better] = (py[better] * ab[0] - px[better] * ab[1]) / nrm

    u0 = dense[1] - dense[0]
    u0 /= np.hypot(*u0)
    u1 = dense[-1] - dense[-2]
    u1 /= np.hypot(*u1)
    ahead = (X - dense[0, 0]) * u0[0] + (Y - dense[0, 1]) * u0[1] >= 0.0
    behind = (X - dense[-1, 0]) * u1[0] + (Y - dense[-1, 1]) * u1[1] <= 0.0
    band = (best_v >= -spec.half_height) & (best_v < spec.half_height)
    mask = band & ahead & behind & (best_d2 <= (spec.half_height + 1.0) ** 2)

    if spec.texture == "constant":
        tex = np.ones((h, w))
    elif spec.texture == "bars":
        tex = 0.5 * (1.0 + _square_wave(best_s, spec.bar_width))
    else:  # checker
        tex = 0.5 * (
            1.0
            + _square_wave(best_s, spec.bar_width)
            * _square_wave(best_v + spec.half_height, spec.bar_width)
        )
    image = tex * mask

    trim = max(2, int(round(1.0 / LINE_DS)))
    centerline = dense[trim:-trim].copy()
    return mask, centerline, image


@dataclass
class SyntheticPage:
    """Composited page: mask, image, and per-strip ground truth."""

    mask: np.ndarray
    image: np.ndarray
    polygons: list = field(default_factory=list)
    centerlines: list = field(default_factory=list)


def render_page(strips, pitch: float) -> SyntheticPage:
    """Stack strips top to bottom at the given row pitch.

    Ground-truth polygons are the smallest enclosing rectangles of each
    placed strip's pixels.  Raises OverlapDetected when two strips share a
    pixel at this pitch.
    """
    if pitch <= 0:
        raise SpecOutOfBounds(f"pitch must be positive, got {pitch}")
    rendered = [render_strip(s) for s in strips]
    if not rendered:
        raise SpecOutOfBounds("page needs at least one strip")
    width = max(m.shape[1] for m, _, _ in rendered)
    tops = [int(round(i * pitch)) for i in range(len(rendered))]
    height = max(t + m.shape[0] for t, (m, _, _) in zip(tops, rendered))

    mask = np.zeros((height, width), dtype=bool)
    image = np.zeros((height, width), dtype=np.float64)
    polygons = []
    centerlines = []
    for top, (m, line, img) in zip(tops, rendered):
        h, w = m.shape
        window = mask[top : top + h, :w]
        if (window & m).any():
            raise OverlapDetected(f"strips collide at pitch {pitch}")
        window |= m
        image[top : top + h, :w] = np.maximum(image[top : top + h, :w], img)
        ys, xs = np.nonzero(m)
        pts = np.stack([xs, ys + top], axis=1).astype(np.float64)
        polygons.append(smallest_enclosing_rectangle(pts))
        centerlines.append(line + [0.0, top])
    return SyntheticPage(mask, image, polygons, centerlines)


def default_grid() -> list[StripSpec]:
    """3 x 3 x 3 parameter sweep used by the center-line fidelity checks.

    Periods put 2.25, 1.75, or 1.25 sine cycles on the strip, so both ends
    sit on a crest or trough where the medial tangent is flat; endpoint
    extension is ill-posed when a strip is cut mid-slope.  Amplitudes scale
    with the period to keep curvature comparable across the sweep.
    """
    length = 400.0
    grid = []
    for half in (5.0, 8.0, 11.0):
        for cycles in (2.25, 1.75, 1.25):
            period = length / cycles
            for amplitude in (0.0, period / 32, period / 22):
                grid.append(
                    StripSpec(
                        length=length,
                        half_height=half,
                        amplitude=amplitude,
                        period=period,
                        texture="bars",
                    )
                )
    return grid
