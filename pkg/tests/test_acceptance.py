"""Acceptance gate: one test per shipped guarantee, run with pytest -v.

Every test is a self-contained check of one public promise, pinned to the
tolerance stated in its docstring.  Oracles live in tests/oracles.py and
recompute expectations independently of the library code.
"""

import json
import math
import time
from pathlib import Path

import numpy as np
import pytest
from oracles import (
    center_points_transcription,
    ctc_loss_enumeration,
    edt_squared_bruteforce,
    polyline_hausdorff,
)

from textkernel import centerline, evaluation, metrics, pipeline, polygons, raster, tps
from textkernel.cli import main as cli_main
from textkernel.synthetic import StripSpec, default_grid, render_page, render_strip

REPO = Path(__file__).resolve().parents[1]


def _blob(rng, size=40):
    """Connected union of disks along a random walk."""
    mask = np.zeros((size, size), bool)
    yy, xx = np.mgrid[0:size, 0:size]
    x = float(rng.uniform(10, size - 10))
    y = float(rng.uniform(10, size - 10))
    for _ in range(int(rng.integers(2, 5))):
        r = float(rng.uniform(3, 7))
        mask |= (xx - x) ** 2 + (yy - y) ** 2 <= r * r
        ang = float(rng.uniform(0, 2 * np.pi))
        step = float(rng.uniform(3, 9))
        x = float(np.clip(x + step * math.cos(ang), 8, size - 8))
        y = float(np.clip(y + step * math.sin(ang), 8, size - 8))
    return mask


def _rect(x, y, w, h):
    return np.array(
        [[x, y], [x + w, y], [x + w, y + h], [x, y + h]], dtype=np.float64
    )


def test_criterion_01_edt_bitwise_exact_on_200_masks():
    """Squared EDT equals brute force bitwise on 200 masks <= 64x64, < 10 s."""
    t0 = time.monotonic()
    rng = np.random.default_rng(20601)
    checked = 0
    for i in range(200):
        h = int(rng.integers(1, 65))
        w = int(rng.integers(1, 65))
        if i == 0:
            mask = np.zeros((5, 7), bool)  # all background
        elif i == 1:
            mask = np.ones((6, 4), bool)  # all foreground
        elif i == 2:
            mask = np.zeros((1, 1), bool)
            mask[0, 0] = True
        else:
            mask = rng.random((h, w)) < float(rng.uniform(0.05, 0.95))
        got = raster.euclidean_distance_transform_squared(mask)
        want = edt_squared_bruteforce(mask)
        assert got.dtype == np.int64
        assert np.array_equal(got, want)
        checked += 1
    elapsed = time.monotonic() - t0
    assert checked == 200
    assert elapsed < 10.0
    print(f"PASS criterion 1: 200/200 masks bitwise equal in {elapsed:.2f}s")


def test_criterion_02_center_points_match_transcription_on_50_regions():
    """Center points and radii identical to the pseudo-code transcription."""
    rng = np.random.default_rng(20602)
    total = 0
    for _ in range(50):
        mask = _blob(rng)
        contour = raster.trace_contour(mask)
        want, want_min_r = center_points_transcription(mask, contour)
        pts, rad, min_r = centerline.generate_center_points(mask)
        assert min_r == pytest.approx(want_min_r, abs=1e-9)
        got = [(x, y, r) for (x, y), r in zip(pts.tolist(), rad.tolist())]
        assert got == want  # identical points, identical radii, same order
        total += len(want)
    assert total > 50  # the sweep actually exercised multi-point regions
    print(f"PASS criterion 2: 50 regions, {total} points, all identical")


def test_criterion_03_reorder_sorts_collinear_and_permutes():
    """100 shuffles of 10 collinear points come back abscissa-sorted; any
    input yields a permutation with first.x <= last.x."""
    rng = np.random.default_rng(20603)
    xs = np.linspace(0.0, 90.0, 10)
    base = np.stack([xs, 0.4 * xs + 3.0], axis=1)
    radii = np.full(10, 2.0)
    for _ in range(100):
        perm = rng.permutation(10)
        line = centerline.reorder_center_points(base[perm], radii[perm], 1.0)
        assert np.array_equal(np.asarray(line.points), base)
    for _ in range(100):
        n = int(rng.integers(2, 12))
        pts = rng.uniform(0, 100, (n, 2))
        rad = rng.uniform(1, 5, n)
        line = centerline.reorder_center_points(pts, rad, 1.0)
        got = np.asarray(line.points)
        assert sorted(map(tuple, got.tolist())) == sorted(map(tuple, pts.tolist()))
        assert got[0, 0] <= got[-1, 0]
    print("PASS criterion 3: 100/100 collinear shuffles sorted, permutation law holds")


def test_criterion_04_recovered_line_within_three_quarter_half_height():
    """Hausdorff(recovered, true medial line) <= 0.75 * half_height on the
    27-spec synthetic grid."""
    worst = 0.0
    for spec in default_grid():
        mask, true_line, _ = render_strip(spec)
        line = centerline.extract_center_line(mask)
        assert line is not None
        h = polyline_hausdorff(np.asarray(line.points), true_line)
        worst = max(worst, h / spec.half_height)
        assert h <= 0.75 * spec.half_height
    print(f"PASS criterion 4: 27/27 specs, worst Hausdorff/half_height={worst:.3f}")


def test_criterion_05_tps_residuals_side_conditions_affine_weights():
    """200 exact fits: residual <= 1e-6 px, side conditions <= 1e-6;
    affine targets leave radial weights <= 1e-6."""
    rng = np.random.default_rng(20605)
    worst_res = worst_side = worst_w = 0.0
    for i in range(200):
        n = int(rng.integers(4, 13))
        src = rng.uniform(0, 100, (n, 2))
        if i % 4 == 0:
            A = rng.uniform(-2, 2, (2, 2))
            b = rng.uniform(-20, 20, 2)
            tgt = src @ A.T + b
        else:
            tgt = rng.uniform(0, 100, (n, 2))
        fit = tps.fit_tps(src, tgt, regularization=0.0)
        res = float(np.abs(fit(src) - tgt).max())
        w = fit.radial_weights
        side = max(
            float(np.abs(w.sum(axis=0)).max()),
            float(np.abs(w.T @ src[:, 0]).max()),
            float(np.abs(w.T @ src[:, 1]).max()),
        )
        worst_res = max(worst_res, res)
        worst_side = max(worst_side, side)
        assert res <= 1e-6
        assert side <= 1e-6
        if i % 4 == 0:
            wmax = float(np.abs(w).max())
            worst_w = max(worst_w, wmax)
            assert wmax <= 1e-6
    print(
        f"PASS criterion 5: 200 fits, residual<={worst_res:.1e}, "
        f"side<={worst_side:.1e}, affine weights<={worst_w:.1e}"
    )


def test_criterion_06_rectification_crop_resize_and_bar_shear():
    """Straight strip matches crop+resize within MAE 2/255; sine-strip bars
    stay vertical within 1 px shear after rectification."""
    cv2 = pytest.importorskip("cv2")
    rng = np.random.default_rng(20606)
    noise = rng.random((80, 240))
    img = cv2.GaussianBlur(noise, (0, 0), sigmaX=2.5)
    y0, half, x0, x1 = 40, 16, 20, 220
    xs = np.arange(float(x0), float(x1) + 1, 25.0)
    line = centerline.CenterLine(
        np.stack([xs, np.full_like(xs, float(y0))], axis=1),
        np.full(len(xs), float(half)),
        min_r=float(half),
    )
    strip = tps.rectify_strip(img, line, height=32)
    crop = img[y0 - half : y0 + half, x0 : x0 + strip.width]
    resized = cv2.resize(crop, (strip.width, 32), interpolation=cv2.INTER_LINEAR)
    mae = float(np.abs(strip.gray - resized).mean())
    assert mae <= 2.0 / 255.0

    # half-cycle sine bend, 20 px of rise on a 24 px tall strip; the strip's
    # own medial line (known exactly for synthetic strips) drives the warp
    spec = StripSpec(
        length=400, half_height=12, amplitude=20, period=800, texture="bars", bar_width=10
    )
    mask, medial, image = render_strip(spec)
    pts = medial[::16]  # ~8 px arc spacing for the control pairs
    if not np.array_equal(pts[-1], medial[-1]):
        pts = np.vstack([pts, medial[-1]])
    sine_line = centerline.CenterLine(
        pts, np.full(len(pts), float(spec.half_height)), spec.half_height / 2.0
    )
    rect = tps.rectify_strip(image, sine_line, height=32).gray
    core = rect[3:-3, :]  # interior rows, clear of the band edges
    col_frac = (core > 0.5).mean(axis=0)
    shear = 0.0
    bars = 0
    x = 8
    while x < rect.shape[1] - 8:
        if col_frac[x] > 0.5:
            run = x
            while run < rect.shape[1] and col_frac[run] > 0.5:
                run += 1
            if run - x >= 4 and run < rect.shape[1] - 8:
                lo, hi = x - 3, run + 3
                cols = np.arange(lo, hi, dtype=np.float64)
                window = core[:, lo:hi]
                if (window.sum(axis=1) > 0.5).all():
                    cents = (window * cols).sum(axis=1) / window.sum(axis=1)
                    rows = np.arange(len(cents), dtype=np.float64)
                    # intensity-weighted centroid tilt, scaled to full height
                    slope = abs(np.polyfit(rows, cents, 1)[0]) * 31.0
                    shear = max(shear, float(slope))
                    bars += 1
            x = run
        else:
            x += 1
    assert bars >= 3  # the measurement saw real bars
    assert shear <= 1.0
    print(f"PASS criterion 6: MAE={mae * 255:.3f}/255, bar shear={shear:.2f}px over {bars} bars")


def test_criterion_07_ctc_matches_enumeration_500_matrices():
    """Forward loss equals path enumeration within 1e-10 for T<=6, C<=4,
    |labels|<=3."""
    rng = np.random.default_rng(20607)
    worst = 0.0
    for _ in range(500):
        T = int(rng.integers(1, 7))
        C = int(rng.integers(2, 5))
        probs = rng.random((T, C)) + 0.05
        probs /= probs.sum(axis=1, keepdims=True)
        while True:
            L = int(rng.integers(0, 4))
            labels = [int(rng.integers(1, C)) for _ in range(L)]
            repeats = sum(1 for a, b in zip(labels, labels[1:]) if a == b)
            if T >= L + repeats:
                break
        got = metrics.ctc_forward_loss(probs, labels)
        want = ctc_loss_enumeration(np.log(probs), labels)
        diff = abs(got - want)
        worst = max(worst, diff)
        assert diff <= 1e-10
    print(f"PASS criterion 7: 500 matrices, worst |diff|={worst:.2e}")


def test_criterion_08_dice_worked_examples_and_range():
    """Worked losses 0, 1, and 0.2 reproduce; fuzzed losses stay in [0, 1]."""
    same = np.ones((4, 4))
    assert metrics.dice_loss(same, same) == 0.0
    left = np.zeros((4, 4))
    left[:, :2] = 1.0
    right = np.zeros((4, 4))
    right[:, 2:] = 1.0
    assert metrics.dice_loss(left, right) == 1.0
    # |P|=3, |G|=2, overlap 2: dice 4/5, loss 1/5 up to one rounding
    p = np.array([1.0, 1.0, 1.0, 0.0])
    g = np.array([1.0, 1.0, 0.0, 0.0])
    assert abs(metrics.dice_loss(p, g) - 0.2) <= 1e-15
    rng = np.random.default_rng(20608)
    for _ in range(200):
        pred = rng.random((6, 6))
        gt = (rng.random((6, 6)) < 0.5).astype(np.float64)
        loss = metrics.dice_loss(pred, gt)
        assert 0.0 <= loss <= 1.0
    print("PASS criterion 8: worked examples 0 / 1 / 0.2 and fuzz range hold")


def test_criterion_09_shrink_offsets_and_touching_boxes():
    """d = A(1-r^2)/L: unit square gives 0.16, a 5 x 2.5 rectangle gives
    8/15 = 0.5333..., both to 1e-12; adjacent boxes split after shrinking."""
    area, perim = polygons.area_perimeter(_rect(0, 0, 1, 1))
    d1 = polygons.shrink_offset(area, perim, 0.6)
    assert abs(d1 - 0.16) <= 1e-12
    area, perim = polygons.area_perimeter(_rect(0, 0, 5, 2.5))
    d2 = polygons.shrink_offset(area, perim, 0.6)
    assert abs(d2 - 8.0 / 15.0) <= 1e-12

    left = _rect(2, 2, 18, 10)
    right = _rect(20, 2, 18, 10)  # shares the x=20 edge with `left`
    shrunk = pipeline.make_kernel_labels([left, right], shape=(16, 44), r=0.6)
    _, n_shrunk, _ = raster.label_components(shrunk)
    plain = pipeline.make_kernel_labels([left, right], shape=(16, 44), r=1.0)
    _, n_plain, _ = raster.label_components(plain)
    assert n_plain == 1  # unshrunk rasterizations touch
    assert n_shrunk == 2  # kernels separate
    print(f"PASS criterion 9: d={d1:.12f}, {d2:.12f}; touching boxes split 1 -> 2")


def test_criterion_10_identity_corpus_and_hand_mini_corpus():
    """preds = gts scores exactly 1 everywhere; the split/missing/junk page
    reproduces the hand-computed 2/3 rates and 14/21 CR/AR."""
    rng = np.random.default_rng(20610)
    pages = []
    for p in range(3):
        boxes = [_rect(5, 5 + 30 * i, 80 + 10 * i, 14) for i in range(4)]
        texts = [f"page{p} line{i} 中文" for i in range(4)]
        pages.append(
            evaluation.PageRecord(
                page=f"id{p}",
                gt_boxes=boxes,
                gt_transcripts=texts,
                pred_boxes=[b.copy() for b in boxes],
                pred_transcripts=list(texts),
            )
        )
    report = evaluation.evaluate_pages(pages)
    assert report.precision == 1.0 and report.recall == 1.0
    assert report.f_measure == 1.0
    assert report.cr == 1.0 and report.ar == 1.0

    mini = evaluation.PageRecord(
        page="mini",
        gt_boxes=[_rect(0, 0, 50, 10), _rect(0, 20, 90, 10), _rect(0, 40, 70, 10)],
        gt_transcripts=["hello", "worldwide", "missing"],
        pred_boxes=[
            _rect(0, 0, 50, 10),
            _rect(0, 20, 50, 10),
            _rect(50, 20, 40, 10),
            _rect(300, 300, 20, 10),
        ],
        pred_transcripts=["hello", "world", "wide", "junk"],
    )
    rep = evaluation.evaluate_pages([mini])
    # 2 true lines of 3 found; 2 matched lines + 1 unmatched box in the
    # precision denominator; "missing" contributes 7 deletions of N=21
    assert rep.recall == pytest.approx(2 / 3)
    assert rep.precision == pytest.approx(2 / 3)
    assert rep.f_measure == pytest.approx(2 / 3)
    assert rep.cr == pytest.approx(14 / 21)
    assert rep.ar == pytest.approx(14 / 21)
    row = rep.pages[0]
    assert row["tp"] == 2 and row["unmatched_boxes"] == 1 and row["dels"] == 7
    print("PASS criterion 10: identity corpus all 1.0; mini corpus 2/3 and 14/21")


def test_criterion_11_end_to_end_deterministic_and_perfect(tmp_path):
    """synth -> spot -> evaluate twice with a fixed seed: byte-identical
    outputs, F = CR = AR = 1.0 on straight strips, under 30 s."""
    t0 = time.monotonic()
    spec = {
        "page": "e2e",
        "pitch": 64,
        "strips": [
            {"length": 320, "half_height": 10, "texture": "bars", "bar_width": 8},
            {"length": 300, "half_height": 9, "texture": "checker", "bar_width": 5},
            {"length": 340, "half_height": 11, "texture": "bars", "bar_width": 11},
            {"length": 280, "half_height": 8, "texture": "constant"},
        ],
        "texts": ["alpha beta", "gamma delta", "epsilon zeta", "eta theta"],
    }
    spec_path = tmp_path / "spec.json"
    spec_path.write_text(json.dumps(spec))
    synth = tmp_path / "synth"
    assert cli_main(["synth", str(spec_path), "-o", str(synth)]) == 0

    outs = []
    for run in ("a", "b"):
        out = tmp_path / f"spot_{run}"
        code = cli_main(
            [
                "spot",
                str(synth / "page_mask.png"),
                "-o",
                str(out),
                "--image",
                str(synth / "page_image.png"),
                "--transcripts",
                str(synth / "transcripts.txt"),
                "--gt",
                str(synth / "gt.json"),
                "--seed",
                "123",
            ]
        )
        assert code == 0
        outs.append(out)
    a, b = outs
    assert (a / "lines.json").read_bytes() == (b / "lines.json").read_bytes()
    assert (a / "pred_page.json").read_bytes() == (b / "pred_page.json").read_bytes()
    strips_a = sorted((a / "strips").iterdir())
    strips_b = sorted((b / "strips").iterdir())
    assert [p.name for p in strips_a] == [p.name for p in strips_b]
    for pa, pb in zip(strips_a, strips_b):
        assert pa.read_bytes() == pb.read_bytes()

    rep = tmp_path / "report"
    assert cli_main(["evaluate", str(a / "pred_page.json"), "-o", str(rep)]) == 0
    report = json.loads((rep / "report.json").read_text())
    assert report["f_measure"] == 1.0
    assert report["cr"] == 1.0 and report["ar"] == 1.0
    elapsed = time.monotonic() - t0
    assert elapsed < 30.0
    print(f"PASS criterion 11: bitwise-identical runs, all scores 1.0, {elapsed:.1f}s")


def test_criterion_12_perturbed_kernels_group_correctly():
    """Kernel labels from boxes perturbed at amplitudes (0.2 vertical,
    1.0 horizontal) still map >= 95% of components to their own gt line."""
    specs = [StripSpec(length=360, half_height=10, texture="constant") for _ in range(6)]
    page = render_page(specs, pitch=64)
    shape = page.mask.shape
    gt_boxes = page.polygons
    correct = total = 0
    for page_seed in range(6):
        perturbed = pipeline.perturbed_boxes(gt_boxes, 0.2, 1.0, seed=1000 + page_seed)
        per_box = [polygons.shrink_polygon(b, 0.6, shape=shape) for b in perturbed]
        union = np.zeros(shape, dtype=bool)
        for m in per_box:
            union |= m
        labels, count, _ = raster.label_components(union)
        comp_boxes = []
        generators = []
        for k in range(1, count + 1):
            ys, xs = np.nonzero(labels == k)
            comp_boxes.append(
                polygons.smallest_enclosing_rectangle(
                    np.stack([xs, ys], axis=1).astype(np.float64)
                )
            )
            overlaps = [int(m[ys, xs].sum()) for m in per_box]
            generators.append(int(np.argmax(overlaps)))
        grouping = evaluation.group_kernel_boxes(comp_boxes, gt_boxes)
        for idx, gen in enumerate(generators):
            total += 1
            if idx in grouping.groups[gen] and idx not in grouping.unmatched:
                correct += 1
    frac = correct / total
    assert total >= 30
    assert frac >= 0.95
    print(f"PASS criterion 12: {correct}/{total} components grouped correctly ({frac:.1%})")
