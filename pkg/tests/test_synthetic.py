import numpy as np
import pytest

from textkernel.centerline import extract_center_line
from textkernel.errors import OverlapDetected, SpecOutOfBounds
from textkernel.polygons import polygon_iou, smallest_enclosing_rectangle
from textkernel.raster import label_components
from textkernel.synthetic import (
    StripSpec,
    SyntheticPage,
    default_grid,
    render_page,
    render_strip,
)


def test_flat_strip_is_axis_aligned_rectangle():
    mask, line, image = render_strip(StripSpec(length=400, half_height=10))
    ys, xs = np.nonzero(mask)
    # the foreground fills its bounding box exactly
    box = mask[ys.min() : ys.max() + 1, xs.min() : xs.max() + 1]
    assert box.all()
    assert ys.max() - ys.min() + 1 == 20
    assert xs.max() - xs.min() + 1 == 401


def test_flat_strip_area_matches_band():
    spec = StripSpec(length=300, half_height=7)
    mask, _, _ = render_strip(spec)
    assert abs(mask.sum() - 2 * 7 * 300) / (2 * 7 * 300) < 0.02


def test_sine_area_within_two_percent_of_band():
    spec = StripSpec(length=400, half_height=10, amplitude=20, period=200)
    mask, line, _ = render_strip(spec)
    d = np.diff(line, axis=0)
    arc = np.hypot(d[:, 0], d[:, 1]).sum() + 2.0  # trimmed a pixel per end
    band = 2 * spec.half_height * arc
    assert abs(mask.sum() - band) / band < 0.02


def test_vertical_strip_normalizes_left_to_right():
    mask, _, _ = render_strip(StripSpec(length=400, half_height=8, rotation=90))
    h, w = mask.shape
    assert h > w  # stacked vertically
    line = extract_center_line(mask)
    assert line.points[0][0] <= line.points[-1][0]


def test_rotation_preserves_area():
    flat, _, _ = render_strip(StripSpec(length=200, half_height=6))
    tilted, _, _ = render_strip(StripSpec(length=200, half_height=6, rotation=37))
    assert abs(int(tilted.sum()) - int(flat.sum())) / flat.sum() < 0.03


def test_centerline_strictly_inside_mask():
    for spec in default_grid()[::4]:
        mask, line, _ = render_strip(spec)
        for x, y in line:
            assert mask[int(round(y)), int(round(x))]


def test_render_is_deterministic():
    spec = StripSpec(length=400, half_height=9, amplitude=11, period=260, texture="checker")
    a = render_strip(spec)
    b = render_strip(spec)
    for u, v in zip(a, b):
        assert np.array_equal(u, v)


def test_texture_constant_is_flat_ink():
    mask, _, image = render_strip(StripSpec(length=200, half_height=5))
    assert np.array_equal(image > 0, mask)
    assert np.all(image[mask] == 1.0)


def test_texture_bars_alternate():
    spec = StripSpec(length=200, half_height=5, texture="bars", bar_width=6)
    mask, _, image = render_strip(spec)
    inside = image[mask]
    assert inside.min() >= 0.0 and inside.max() <= 1.0
    # saturated ink/gap away from the anti-aliased edges
    assert ((inside < 0.05) | (inside > 0.95)).mean() > 0.6
    # roughly half the strip is inked
    assert 0.35 < inside.mean() < 0.65


def test_texture_checker_varies_across_rows():
    spec = StripSpec(length=200, half_height=6, texture="checker", bar_width=4)
    mask, _, image = render_strip(spec)
    ys, xs = np.nonzero(mask)
    mid = int(np.median(xs))
    # a column can sit on a cell edge (all ~0.5); a cell-width sweep cannot
    hits = 0
    for col in range(mid, mid + 4):
        column = image[ys.min() : ys.max() + 1, col]
        hits += (column > 0.95).any() and (column < 0.05).any()
    assert hits >= 1


def test_spec_validation():
    with pytest.raises(SpecOutOfBounds):
        StripSpec(length=100, half_height=1.5)
    with pytest.raises(SpecOutOfBounds):
        StripSpec(length=100, half_height=5, period=0)
    with pytest.raises(SpecOutOfBounds):
        StripSpec(length=10, half_height=5)
    with pytest.raises(SpecOutOfBounds):
        StripSpec(length=100, half_height=5, texture="noise")
    with pytest.raises(SpecOutOfBounds):
        StripSpec(length=100, half_height=5, bar_width=0)


def test_spec_roundtrip_ignores_unknown_keys():
    spec = StripSpec(length=120, half_height=4, amplitude=3, period=80)
    data = spec.to_dict()
    data["comment"] = "extra"
    again = StripSpec.from_dict(data)
    assert again == spec


def test_page_stacks_eight_sine_strips():
    specs = [
        StripSpec(length=400, half_height=8, amplitude=10, period=320, texture="bars")
        for _ in range(8)
    ]
    page = render_page(specs, pitch=3 * 16)
    labels, count, _ = label_components(page.mask)
    assert count == 8
    assert len(page.polygons) == 8
    for k in range(1, count + 1):
        ys, xs = np.nonzero(labels == k)
        rect = smallest_enclosing_rectangle(
            np.stack([xs, ys], axis=1).astype(np.float64)
        )
        # components come out top to bottom, same order as the gt list
        iou = polygon_iou(rect, page.polygons[k - 1])
        assert iou >= 0.6


def test_page_centerlines_carry_offset():
    specs = [StripSpec(length=200, half_height=5) for _ in range(3)]
    page = render_page(specs, pitch=40)
    for line in page.centerlines:
        for x, y in line[:: len(line) // 7]:
            assert page.mask[int(round(y)), int(round(x))]


def test_page_overlap_detected():
    specs = [StripSpec(length=200, half_height=8) for _ in range(2)]
    with pytest.raises(OverlapDetected):
        render_page(specs, pitch=4)


def test_page_rejects_bad_pitch():
    with pytest.raises(SpecOutOfBounds):
        render_page([StripSpec(length=100, half_height=4)], pitch=0)
    with pytest.raises(SpecOutOfBounds):
        render_page([], pitch=10)


def test_default_grid_shape():
    grid = default_grid()
    assert len(grid) == 27
    for spec in grid:
        assert spec.amplitude <= spec.period / 2
