"""Command-line front end.

Six subcommands cover the library surface: centerline, rectify, shrink,
evaluate, synth, and spot.  Exit status is 0 on success, 1 for bad input
or usage, 2 for internal faults.  Set TEXTKERNEL_LOG to error, warn,
info, or debug to tune stderr logging.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .centerline import CenterLine, extract_center_line
from .errors import TextKernelError
from .evaluation import PageRecord, evaluate_pages, read_page_file, write_page_file
from .pipeline import PipelineConfig, make_kernel_labels, spot_page
from .raster import label_components, read_image, read_mask, write_image, write_mask
from .synthetic import StripSpec, render_page
from .tps import rectify_strip

log = logging.getLogger("textkernel.cli")

_LEVELS = {
    "error": logging.ERROR,
    "warn": logging.WARNING,
    "info": logging.INFO,
    "debug": logging.DEBUG,
}

_EPILOG = (
    "defaults: shrink ratio r=0.6, strip height=32, suppression multiplier=4"
)


class _Parser(argparse.ArgumentParser):
    """Usage errors print help and exit 1 instead of argparse's 2."""

    def error(self, message):
        self.print_help(sys.stderr)
        self.exit(1, f"\nerror: {message}\n")


def _setup_logging():
    name = os.environ.get("TEXTKERNEL_LOG", "warn").strip().lower()
    logging.basicConfig(
        level=_LEVELS.get(name, logging.WARNING),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="textkernel", description=__doc__, epilog=_EPILOG)
    parser.add_argument("--version", action="version", version=f"textkernel {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, metavar="COMMAND")

    p = sub.add_parser("centerline", help="extract center lines from a mask", epilog=_EPILOG)
    p.add_argument("mask", help="binary mask (PNG or PGM)")
    p.add_argument("-o", "--output", required=True, help="center-line JSON path")
    p.add_argument("--suppress-mult", type=float, default=4.0,
                   help="suppression radius in units of min_r (default %(default)s)")
    p.add_argument("--overlay", help="also render an overlay PNG here")
    p.set_defaults(func=cmd_centerline)

    p = sub.add_parser("rectify", help="warp one strip straight", epilog=_EPILOG)
    p.add_argument("image", help="page image (PNG or PGM)")
    p.add_argument("lines", help="center-line JSON from the centerline command")
    p.add_argument("-o", "--output", required=True, help="strip PNG path")
    p.add_argument("--height", type=int, default=32,
                   help="rectified strip height in pixels (default %(default)s)")
    p.add_argument("--line-index", type=int, default=0,
                   help="which line to rectify when the JSON holds several")
    p.set_defaults(func=cmd_rectify)

    p = sub.add_parser("shrink", help="render kernel labels from gt boxes", epilog=_EPILOG)
    p.add_argument("pages", help="page JSON with gt boxes")
    p.add_argument("-o", "--output", required=True, help="kernel mask PNG path")
    p.add_argument("--r", type=float, default=0.6,
                   help="shrink ratio (default %(default)s)")
    p.add_argument("--size", type=int, nargs=2, metavar=("W", "H"),
                   help="canvas size; inferred from the boxes when omitted")
    p.add_argument("--page-index", type=int, default=0,
                   help="which page of the JSON to use")
    p.set_defaults(func=cmd_shrink)

    p = sub.add_parser("evaluate", help="score predictions against gt", epilog=_EPILOG)
    p.add_argument("pages", help="page JSON with gt and pred entries")
    p.add_argument("-o", "--outdir", required=True,
                   help="directory for report.json, report.csv, report.png")
    p.add_argument("--iou-grid", type=float, default=1.0,
                   help="rasterization cell size for box IOU (default %(default)s)")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("synth", help="render a synthetic page", epilog=_EPILOG)
    p.add_argument("spec", help="page spec JSON: pitch, strips, optional texts")
    p.add_argument("-o", "--outdir", required=True, help="output directory")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("spot", help="spot lines on a page mask", epilog=_EPILOG)
    p.add_argument("mask", help="binary page mask (PNG or PGM)")
    p.add_argument("-o", "--outdir", required=True, help="output directory")
    p.add_argument("--image", help="page image to rectify from (defaults to the mask)")
    p.add_argument("--height", type=int, default=32,
                   help="rectified strip height (default %(default)s)")
    p.add_argument("--suppress-mult", type=float, default=4.0,
                   help="suppression radius in units of min_r (default %(default)s)")
    p.add_argument("--r", type=float, default=0.6,
                   help="kernel shrink ratio carried in run metadata (default %(default)s)")
    p.add_argument("--iou-grid", type=float, default=1.0,
                   help="IOU cell size carried in run metadata (default %(default)s)")
    p.add_argument("--amp-v", type=float, default=0.2,
                   help="vertical perturbation amplitude (default %(default)s)")
    p.add_argument("--amp-h", type=float, default=1.0,
                   help="horizontal perturbation amplitude (default %(default)s)")
    p.add_argument("--seed", type=int, help="seed recorded in the pipeline config")
    p.add_argument("--jobs", type=int, default=1,
                   help="worker threads (default %(default)s)")
    p.add_argument("--downscale4", action="store_true",
                   help="detect on a quarter-scale mask")
    p.add_argument("--transcripts",
                   help="text file, one line per spotted strip in reading order")
    p.add_argument("--gt", help="gt page JSON; writes a merged pred page JSON")
    p.add_argument("--overlay", action="store_true", help="render overlay.png")
    p.set_defaults(func=cmd_spot)
    return parser


def cmd_centerline(args) -> int:
    mask = read_mask(args.mask)
    labels, count, slices = label_components(mask)
    items = sorted(
        ((slices[k - 1][1].start, slices[k - 1][0].start, k) for k in range(1, count + 1))
    )
    lines = []
    for x0, y0, k in items:
        sly, slx = slices[k - 1]
        crop = np.pad(labels[sly, slx] == k, 2)
        line = extract_center_line(crop, args.suppress_mult)
        if line is None:
            log.warning("component %d has no center points, skipped", k)
            continue
        pts = np.asarray(line.points) + [slx.start - 2, sly.start - 2]
        lines.append(CenterLine(pts, line.radii, line.min_r))
    Path(args.output).write_text(
        json.dumps([l.to_dict() for l in lines], indent=2), encoding="utf-8"
    )
    if args.overlay:
        from .plots import save_overlay

        save_overlay(args.overlay, mask, lines=lines)
    print(f"wrote {args.output} ({len(lines)} lines from {count} components)")
    return 0


def cmd_rectify(args) -> int:
    image = read_image(args.image)
    data = json.loads(Path(args.lines).read_text(encoding="utf-8"))
    if isinstance(data, dict):
        data = [data]
    if not 0 <= args.line_index < len(data):
        raise ValueError(
            f"line index {args.line_index} out of range, file has {len(data)} lines"
        )
    line = CenterLine.from_dict(data[args.line_index])
    strip = rectify_strip(image, line, args.height)
    strip.save(args.output)
    print(f"wrote {args.output} ({strip.width}x{strip.height})")
    return 0


def cmd_shrink(args) -> int:
    pages = read_page_file(args.pages)
    if not 0 <= args.page_index < len(pages):
        raise ValueError(f"page index {args.page_index} out of range ({len(pages)} pages)")
    boxes = pages[args.page_index].gt_boxes
    if args.size:
        w, h = args.size
    else:
        if not boxes:
            raise ValueError("no gt boxes and no --size given, canvas is undefined")
        coords = np.vstack(boxes)
        w = int(np.ceil(coords[:, 0].max())) + 2
        h = int(np.ceil(coords[:, 1].max())) + 2
    kernels = make_kernel_labels(boxes, (h, w), r=args.r)
    write_mask(args.output, kernels)
    print(f"wrote {args.output} ({kernels.sum()} kernel pixels, r={args.r})")
    return 0


def cmd_evaluate(args) -> int:
    pages = read_page_file(args.pages)
    report = evaluate_pages(pages, grid=args.iou_grid)
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "report.json").write_text(report.to_json(), encoding="utf-8")
    (outdir / "report.csv").write_text(report.to_csv(), encoding="utf-8")
    from .plots import save_report_figure

    save_report_figure(outdir / "report.png", report)
    print(report.to_table())
    print(f"wrote {outdir}/report.json, report.csv, report.png")
    return 0


def cmd_synth(args) -> int:
    spec = json.loads(Path(args.spec).read_text(encoding="utf-8"))
    strips = [StripSpec.from_dict(d) for d in spec["strips"]]
    page = render_page(strips, pitch=float(spec["pitch"]))
    texts = spec.get("texts") or [f"line{i:03d}" for i in range(len(strips))]
    if len(texts) != len(strips):
        raise ValueError(f"{len(texts)} texts for {len(strips)} strips")
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    write_mask(outdir / "page_mask.png", page.mask)
    write_image(outdir / "page_image.png", page.image)
    record = PageRecord(
        page=str(spec.get("page", "synthetic")),
        gt_boxes=[p.tolist() for p in page.polygons],
        gt_transcripts=list(texts),
    )
    write_page_file(outdir / "gt.json", [record])
    # reading order used by `spot`: leftmost-x, ties broken by top-y
    order = sorted(
        range(len(page.polygons)),
        key=lambda i: (page.polygons[i][:, 0].min(), page.polygons[i][:, 1].min()),
    )
    (outdir / "transcripts.txt").write_text(
        "".join(texts[i] + "\n" for i in order), encoding="utf-8"
    )
    print(f"wrote {outdir}/page_mask.png, page_image.png, gt.json, transcripts.txt")
    return 0


def cmd_spot(args) -> int:
    mask = read_mask(args.mask)
    image = read_image(args.image) if args.image else None
    config = PipelineConfig(
        r=args.r,
        height=args.height,
        suppress_mult=args.suppress_mult,
        iou_grid=args.iou_grid,
        amp_v=args.amp_v,
        amp_h=args.amp_h,
        seed=args.seed,
        jobs=args.jobs,
        downscale4=args.downscale4,
    )
    lines, skipped = spot_page(mask, image, config)

    texts = None
    if args.transcripts:
        raw = Path(args.transcripts).read_text(encoding="utf-8")
        texts = raw.splitlines()
        if len(texts) != len(lines):
            raise ValueError(
                f"{len(texts)} transcripts for {len(lines)} spotted lines"
            )

    outdir = Path(args.outdir)
    (outdir / "strips").mkdir(parents=True, exist_ok=True)
    rows = []
    for l in lines:
        rel = f"strips/strip_{l.index:03d}.png"
        l.strip.save(outdir / rel)
        rows.append(
            {
                "index": l.index,
                "box": l.polygon.tolist(),
                "line": l.line.to_dict(),
                "strip": rel,
                "text": texts[l.index] if texts else "",
            }
        )
    (outdir / "lines.json").write_text(
        json.dumps({"lines": rows, "skipped": skipped}, ensure_ascii=False, indent=2),
        encoding="utf-8",
    )
    if args.gt:
        gt_pages = read_page_file(args.gt)
        if len(gt_pages) != 1:
            raise ValueError(f"--gt expects a single page, got {len(gt_pages)}")
        gt = gt_pages[0]
        merged = PageRecord(
            page=gt.page,
            gt_boxes=gt.gt_boxes,
            gt_transcripts=gt.gt_transcripts,
            pred_boxes=[l.polygon for l in lines],
            pred_transcripts=[r["text"] for r in rows],
        )
        write_page_file(outdir / "pred_page.json", [merged])
    if args.overlay:
        from .plots import save_overlay

        save_overlay(
            outdir / "overlay.png",
            mask,
            lines=[l.line for l in lines],
            polygons=[l.polygon for l in lines],
            image=image,
        )
    print(f"wrote {outdir}/lines.json ({len(lines)} lines, {len(skipped)} skipped)")
    return 0


def main(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if getattr(args, "func", None) is None:
        parser.print_help(sys.stderr)
        return 1
    try:
        return args.func(args)
    except (TextKernelError, OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        log.debug("input error", exc_info=True)
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # anything else is a fault in this package
        log.exception("internal error")
        print(f"internal error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
