"""Page-level scoring: box grouping, detection rates, CR/AR, perturbation.

A page couples ground-truth line polygons and transcripts with predicted
kernel boxes and their transcripts.  Grouping assigns each predicted box
to the ground-truth line of highest IOU after sorting boxes left to right;
boxes with zero IOU everywhere land in group 0 but are flagged unmatched
and excluded from the transcript comparison, counting only against
precision.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import EmptyReference, NoGroundTruth, ShapeMismatch
from .metrics import levenshtein_counts
from .polygons import polygon_iou

__all__ = [
    "PageRecord",
    "GroupingResult",
    "group_kernel_boxes",
    "detection_scores",
    "page_cr_ar",
    "evaluate_pages",
    "EvalReport",
    "perturb_box",
    "read_page_file",
    "write_page_file",
]

LENGTH_RULE = 0.9  # grouped transcript must reach this share of the gt length


@dataclass
class PageRecord:
    """One page of ground truth and predictions."""

    page: str
    gt_boxes: list
    gt_transcripts: list
    pred_boxes: list = field(default_factory=list)
    pred_transcripts: list = field(default_factory=list)

    def __post_init__(self):
        if len(self.gt_boxes) != len(self.gt_transcripts):
            raise ShapeMismatch(
                f"page {self.page}: {len(self.gt_boxes)} gt boxes vs "
                f"{len(self.gt_transcripts)} transcripts"
            )
        if len(self.pred_boxes) != len(self.pred_transcripts):
            raise ShapeMismatch(
                f"page {self.page}: {len(self.pred_boxes)} pred boxes vs "
                f"{len(self.pred_transcripts)} transcripts"
            )
        self.gt_boxes = [np.asarray(b, dtype=np.float64) for b in self.gt_boxes]
        self.pred_boxes = [np.asarray(b, dtype=np.float64) for b in self.pred_boxes]

    def to_dict(self) -> dict:
        return {
            "page": self.page,
            "gt": [
                {"poly": b.tolist(), "text": t}
                for b, t in zip(self.gt_boxes, self.gt_transcripts)
            ],
            "pred": [
                {"poly": b.tolist(), "text": t}
                for b, t in zip(self.pred_boxes, self.pred_transcripts)
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PageRecord":
        return cls(
            page=str(data.get("page", "")),
            gt_boxes=[e["poly"] for e in data.get("gt", [])],
            gt_transcripts=[e["text"] for e in data.get("gt", [])],
            pred_boxes=[e["poly"] for e in data.get("pred", [])],
            pred_transcripts=[e["text"] for e in data.get("pred", [])],
        )


def read_page_file(path) -> list[PageRecord]:
    """Load a page JSON file holding one page object or a list of them."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if isinstance(data, dict):
        data = [data]
    return [PageRecord.from_dict(d) for d in data]


def write_page_file(path, pages) -> None:
    records = [p.to_dict() for p in pages]
    payload = records[0] if len(records) == 1 else records
    Path(path).write_text(
        json.dumps(payload, ensure_ascii=False, indent=2), encoding="utf-8"
    )


@dataclass
class GroupingResult:
    """groups[i] lists pred indices for gt line i, left-to-right; unmatched
    pred indices additionally appear here and sit in group 0."""

    groups: list
    unmatched: list


def group_kernel_boxes(pred_boxes, gt_boxes, grid: float = 1.0) -> GroupingResult:
    """Assign predicted boxes to ground-truth lines by maximum IOU.

    Boxes are presorted by leftmost abscissa so each group reads left to
    right.  Argmax ties take the lowest gt index; all-zero-IOU boxes go to
    group 0 and are reported as unmatched.
    """
    if len(gt_boxes) == 0:
        raise NoGroundTruth("grouping needs at least one ground-truth box")
    gt_boxes = [np.asarray(b, dtype=np.float64) for b in gt_boxes]
    pred_boxes = [np.asarray(b, dtype=np.float64) for b in pred_boxes]
    groups = [[] for _ in gt_boxes]
    unmatched = []
    if len(pred_boxes) == 0:
        return GroupingResult(groups, unmatched)
    lefts = np.array([b[:, 0].min() for b in pred_boxes])
    order = np.argsort(lefts, kind="stable")
    for k in order:
        box = pred_boxes[k]
        ious = np.array([polygon_iou(box, g, grid=grid) for g in gt_boxes])
        if ious.max() == 0.0:
            groups[0].append(int(k))
            unmatched.append(int(k))
        else:
            groups[int(np.argmax(ious))].append(int(k))
    return GroupingResult(groups, unmatched)


def _line_rows(page: PageRecord, grid: float):
    """Per-gt-line transcript comparison after grouping."""
    grouping = group_kernel_boxes(page.pred_boxes, page.gt_boxes, grid=grid)
    skip = set(grouping.unmatched)
    rows = []
    for gi, gt_text in enumerate(page.gt_transcripts):
        idxs = [k for k in grouping.groups[gi] if k not in skip]
        concat = "".join(str(page.pred_transcripts[k]) for k in idxs)
        s, d, i = levenshtein_counts(gt_text, concat)
        tp = bool(idxs) and len(concat) >= LENGTH_RULE * len(gt_text)
        rows.append(
            {
                "matched": bool(idxs),
                "tp": tp,
                "subs": s,
                "dels": d,
                "ins": i,
                "n": len(gt_text),
            }
        )
    return rows, grouping


@dataclass
class EvalReport:
    precision: float
    recall: float
    f_measure: float
    cr: float
    ar: float
    pages: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f_measure": self.f_measure,
            "cr": self.cr,
            "ar": self.ar,
            "pages": self.pages,
        }

    def to_json(self, **kwargs) -> str:
        kwargs.setdefault("indent", 2)
        return json.dumps(self.to_dict(), **kwargs)

    _COLUMNS = (
        "page",
        "gt_lines",
        "pred_boxes",
        "tp",
        "matched_lines",
        "unmatched_boxes",
        "subs",
        "dels",
        "ins",
        "n_symbols",
        "cr",
        "ar",
    )

    def _rows(self):
        for row in self.pages:
            yield [row[c] for c in self._COLUMNS]

    def to_table(self) -> str:
        """Aligned text table, one row per page plus the corpus scores."""
        header = list(self._COLUMNS)
        body = [
            [f"{v:.4f}" if isinstance(v, float) else str(v) for v in row]
            for row in self._rows()
        ]
        widths = [
            max(len(header[i]), *(len(r[i]) for r in body)) if body else len(header[i])
            for i in range(len(header))
        ]
        lines = [
            "  ".join(h.ljust(w) for h, w in zip(header, widths)),
            "  ".join("-" * w for w in widths),
        ]
        for r in body:
            lines.append("  ".join(v.ljust(w) for v, w in zip(r, widths)))
        lines.append("")
        lines.append(
            f"precision {self.precision:.4f}  recall {self.recall:.4f}  "
            f"f_measure {self.f_measure:.4f}  cr {self.cr:.4f}  ar {self.ar:.4f}"
        )
        return "\n".join(lines)

    def to_csv(self) -> str:
        """Comma-delimited per-page rows with a trailing TOTAL row."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self._COLUMNS)
        for row in self._rows():
            writer.writerow(row)
        writer.writerow(
            [
                "TOTAL",
                sum(r["gt_lines"] for r in self.pages),
                sum(r["pred_boxes"] for r in self.pages),
                sum(r["tp"] for r in self.pages),
                sum(r["matched_lines"] for r in self.pages),
                sum(r["unmatched_boxes"] for r in self.pages),
                sum(r["subs"] for r in self.pages),
                sum(r["dels"] for r in self.pages),
                sum(r["ins"] for r in self.pages),
                sum(r["n_symbols"] for r in self.pages),
                self.cr,
                self.ar,
            ]
        )
        return buf.getvalue()


def evaluate_pages(pages, grid: float = 1.0) -> EvalReport:
    """Full protocol: grouping, 90%-length detection rule, corpus CR/AR."""
    pages = list(pages)
    tp = lines = matched = unmatched = 0
    subs = dels = ins = nsym = 0
    page_rows = []
    for page in pages:
        rows, grouping = _line_rows(page, grid)
        p_tp = sum(r["tp"] for r in rows)
        p_matched = sum(r["matched"] for r in rows)
        p_s = sum(r["subs"] for r in rows)
        p_d = sum(r["dels"] for r in rows)
        p_i = sum(r["ins"] for r in rows)
        p_n = sum(r["n"] for r in rows)
        tp += p_tp
        lines += len(rows)
        matched += p_matched
        unmatched += len(grouping.unmatched)
        subs += p_s
        dels += p_d
        ins += p_i
        nsym += p_n
        page_rows.append(
            {
                "page": page.page,
                "gt_lines": len(rows),
                "pred_boxes": len(page.pred_boxes),
                "tp": p_tp,
                "matched_lines": p_matched,
                "unmatched_boxes": len(grouping.unmatched),
                "subs": p_s,
                "dels": p_d,
                "ins": p_i,
                "n_symbols": p_n,
                "cr": (p_n - p_s - p_d) / p_n if p_n else 0.0,
                "ar": (p_n - p_s - p_d - p_i) / p_n if p_n else 0.0,
            }
        )
    if lines == 0:
        raise NoGroundTruth("no ground-truth lines in the page set")
    recall = tp / lines
    denom = matched + unmatched
    precision = tp / denom if denom else 0.0
    f = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    if nsym == 0:
        raise EmptyReference("ground-truth transcripts are all empty")
    cr = (nsym - subs - dels) / nsym
    ar = (nsym - subs - dels - ins) / nsym
    return EvalReport(precision, recall, f, cr, ar, page_rows)


def detection_scores(pages, grid: float = 1.0):
    """(precision, recall, f_measure) under the 90%-length rule."""
    report = evaluate_pages(pages, grid=grid)
    return report.precision, report.recall, report.f_measure


def page_cr_ar(pages, grid: float = 1.0):
    """(CR, AR) aggregated over all gt lines, N = total gt symbols."""
    report = evaluate_pages(pages, grid=grid)
    return report.cr, report.ar


def perturb_box(box, amplitude_v: float, amplitude_h: float, seed=None):
    """Jitter a 4-vertex box per-vertex, scaled by its short side.

    Vertical offsets are uniform in +-amplitude_v * short_side, horizontal
    in +-amplitude_h * short_side.  `seed` may be an int or a Generator;
    a fixed int seed reproduces bitwise.
    """
    box = np.asarray(box, dtype=np.float64)
    if box.shape != (4, 2):
        raise ShapeMismatch(f"perturb_box needs a (4, 2) box, got {box.shape}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    side_a = float(np.hypot(*(box[1] - box[0])))
    side_b = float(np.hypot(*(box[2] - box[1])))
    short = min(side_a, side_b)
    offsets = rng.uniform(-1.0, 1.0, size=(4, 2))
    offsets *= np.array([amplitude_h * short, amplitude_v * short])
    return box + offsets
