"""Ranked-detection evaluation: difficulty buckets, greedy matching,
precision/recall and interpolated average precision.

Ground truths are bucketed by 2D box height, occlusion level and
truncation into easy / moderate / hard (the thresholds follow the public
KITTI devkit convention: 40/25/25 px, 0/1/2, 0.15/0.30/0.50). Buckets
are cumulative -- evaluating at hard counts every moderate and easy
object as well -- and objects outside the bucket absorb detections
without counting as true or false positives.

Matching is greedy over detections ranked by descending score, pooled
across frames. AP comes in two interpolations: 11 recall points
including 0, or 40 points excluding 0 (a four-times-denser grid).
"""

from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from .boxes import Box3D, iou_3d, iou_bev
from .errors import AlignmentError

# per-bucket limits: minimum bbox height (px), maximum occlusion level,
# maximum truncation fraction
_MIN_HEIGHT = (40.0, 25.0, 25.0)
_MAX_OCCLUSION = (0, 1, 2)
_MAX_TRUNCATION = (0.15, 0.30, 0.50)

_R11_GRID = np.linspace(0.0, 1.0, 11)
_R40_GRID = np.arange(1, 41) / 40.0


class Difficulty(IntEnum):
    EASY = 0
    MODERATE = 1
    HARD = 2
    IGNORED = 3


@dataclass
class GtObject:
    """A ground-truth object: class label, 3D box and the 2D-box metadata
    that drives difficulty assignment."""

    label: str
    box3d: Box3D
    bbox2d: tuple = (0.0, 0.0, 0.0, 0.0)  # (left, top, right, bottom) pixels
    truncation: float = 0.0
    occlusion: int = 0

    def __post_init__(self):
        left, top, right, bottom = self.bbox2d
        if right < left or bottom < top:
            raise ValueError(f"bbox2d must be well-ordered, got {self.bbox2d}")


@dataclass
class Detection:
    label: str
    box3d: Box3D
    score: float

    def __post_init__(self):
        if not np.isfinite(self.score):
            raise ValueError(f"detection score must be finite, got {self.score}")


def assign_difficulty(gt: GtObject) -> Difficulty:
    """Bucket a ground truth by bbox height, occlusion and truncation."""
    height = gt.bbox2d[3] - gt.bbox2d[1]
    for level in (Difficulty.EASY, Difficulty.MODERATE, Difficulty.HARD):
        if (height >= _MIN_HEIGHT[level]
                and gt.occlusion <= _MAX_OCCLUSION[level]
                and gt.truncation <= _MAX_TRUNCATION[level]):
            return level
    return Difficulty.IGNORED


@dataclass
class MatchResult:
    """Ranked matching outcome: TP/FP flags for the non-absorbed detections
    (descending score), their scores, and the counted ground-truth total."""

    flags: list = field(default_factory=list)
    scores: list = field(default_factory=list)
    num_gt: int = 0

    @property
    def unmatched_gt(self) -> int:
        return self.num_gt - sum(self.flags)


def match_detections(dets, gts, iou_threshold: float, kind: str = "3d",
                     ignored=None) -> MatchResult:
    """Greedy one-to-one matching of ranked detections against ground truths.

    Detections are ranked by descending score (ties keep input order).
    Each detection takes the unmatched ground truth of highest IoU at or
    above the threshold; a match to an ignored ground truth is absorbed,
    producing neither a TP nor an FP. All inputs must share one class.
    """
    if not 0.0 < iou_threshold <= 1.0:
        raise ValueError(f"iou threshold must be in (0, 1], got {iou_threshold}")
    iou_fn = {"3d": iou_3d, "bev": iou_bev}.get(kind)
    if iou_fn is None:
        raise ValueError(f"kind must be '3d' or 'bev', got {kind!r}")
    if ignored is None:
        ignored = [False] * len(gts)

    order = sorted(range(len(dets)), key=lambda i: -dets[i].score)
    taken = [False] * len(gts)
    result = MatchResult(num_gt=sum(1 for ig in ignored if not ig))
    for i in order:
        best_iou, best_j = -1.0, -1
        for j, gt in enumerate(gts):
            if taken[j]:
                continue
            overlap = iou_fn(dets[i].box3d, gt.box3d)
            if overlap >= iou_threshold and overlap > best_iou:
                best_iou, best_j = overlap, j
        if best_j == -1:
            result.flags.append(False)
            result.scores.append(dets[i].score)
        else:
            taken[best_j] = True
            if not ignored[best_j]:
                result.flags.append(True)
                result.scores.append(dets[i].score)
    return result


@dataclass
class PrCurve:
    """Cumulative (recall, precision) samples along the ranking. degenerate
    marks the num_gt = 0 case where recall is undefined."""

    recall: np.ndarray
    precision: np.ndarray
    degenerate: bool = False


def precision_recall(flags, num_gt: int) -> PrCurve:
    """Cumulative precision and recall at every rank position."""
    flags = np.asarray(flags, dtype=bool)
    if num_gt < 0:
        raise ValueError(f"num_gt must be >= 0, got {num_gt}")
    if num_gt == 0:
        if flags.size:
            rank = np.arange(1, flags.size + 1)
            return PrCurve(recall=np.full(flags.size, np.nan),
                           precision=np.cumsum(flags) / rank,
                           degenerate=True)
        return PrCurve(recall=np.zeros(0), precision=np.zeros(0))
    tp_cum = np.cumsum(flags)
    rank = np.arange(1, flags.size + 1)
    return PrCurve(recall=tp_cum / num_gt, precision=tp_cum / np.maximum(rank, 1))


def _interpolated_ap(curve: PrCurve, grid: np.ndarray) -> float:
    if curve.degenerate or curve.recall.size == 0:
        return 0.0
    total = 0.0
    for r in grid:
        at_least = curve.precision[curve.recall >= r]
        if at_least.size:
            total += float(at_least.max())
    return total / len(grid)


def ap_11(curve: PrCurve) -> float:
    """11-point interpolated AP over recall grid {0, 0.1, ..., 1.0}."""
    return _interpolated_ap(curve, _R11_GRID)


def ap_40(curve: PrCurve) -> float:
    """40-point interpolated AP over recall grid {1/40, ..., 1}, excluding 0."""
    return _interpolated_ap(curve, _R40_GRID)


def route_by_distance(box: Box3D, thresholds=(30.0, 50.0)) -> int:
    """Assign a box to one of three heads by its camera distance z.

    Head 0 for z <= near, 1 for near < z <= far, 2 beyond; the default
    thresholds are (30, 50) metres.
    """
    near, far = thresholds
    if not near < far:
        raise ValueError(f"thresholds must be ordered, got ({near}, {far})")
    if box.z <= near:
        return 0
    if box.z <= far:
        return 1
    return 2


@dataclass
class ApResult:
    difficulty: Difficulty
    ap_r11: float
    ap_r40: float
    num_gt: int


def evaluate(dets_by_frame, gts_by_frame, label: str, kind: str = "3d",
             iou_threshold: float = 0.7) -> dict:
    """Pooled evaluation across frames for one class and IoU kind.

    Both arguments map frame id -> list of Detection / GtObject; the two
    frame sets must be identical. Within each difficulty bucket, same-class
    ground truths outside the bucket and every 'DontCare' ground truth are
    ignored (absorbing); matching runs per frame, then TP/FP flags are
    pooled and re-ranked globally by score. Returns a dict
    Difficulty -> ApResult with both AP interpolations.
    """
    det_frames, gt_frames = set(dets_by_frame), set(gts_by_frame)
    if det_frames != gt_frames:
        missing = sorted(gt_frames - det_frames)
        extra = sorted(det_frames - gt_frames)
        raise AlignmentError(
            f"frame sets differ: missing predictions for {missing}, "
            f"unmatched prediction frames {extra}"
        )

    results = {}
    for bucket in (Difficulty.EASY, Difficulty.MODERATE, Difficulty.HARD):
        pooled = []  # (score, order, is_tp)
        num_gt = 0
        counter = 0
        for frame in sorted(gts_by_frame):
            gts = [g for g in gts_by_frame[frame]
                   if g.label == label or g.label == "DontCare"]
            ignored = [g.label == "DontCare" or assign_difficulty(g) > bucket
                       for g in gts]
            dets = [d for d in dets_by_frame[frame] if d.label == label]
            m = match_detections(dets, gts, iou_threshold, kind, ignored)
            num_gt += m.num_gt
            for score, flag in zip(m.scores, m.flags):
                pooled.append((score, counter, flag))
                counter += 1
        pooled.sort(key=lambda t: (-t[0], t[1]))
        curve = precision_recall([flag for _, _, flag in pooled], num_gt)
        results[bucket] = ApResult(bucket, ap_11(curve), ap_40(curve), num_gt)
    return results


# --- result report ----------------------------------------------------------

REPORT_COLUMNS = ("class", "kind", "difficulty", "metric", "value")


def results_to_rows(label: str, kind: str, results: dict, metrics=("r11", "r40")):
    """Flatten an evaluate() result into (class, kind, difficulty, metric,
    value) rows, one per difficulty and requested metric."""
    rows = []
    for bucket in (Difficulty.EASY, Difficulty.MODERATE, Difficulty.HARD):
        res = results[bucket]
        for metric in metrics:
            value = res.ap_r11 if metric == "r11" else res.ap_r40
            rows.append((label, kind, bucket.name.lower(), metric, value))
    return rows


def rows_to_csv(rows) -> str:
    lines = [",".join(REPORT_COLUMNS)]
    for label, kind, difficulty, metric, value in rows:
        val = format(value, ".6f") if isinstance(value, float) else str(value)
        lines.append(f"{label},{kind},{difficulty},{metric},{val}")
    return "\n".join(lines) + "\n"


def rows_to_table(rows) -> str:
    """Aligned text table with the same columns as the CSV report."""
    rendered = [REPORT_COLUMNS]
    for label, kind, difficulty, metric, value in rows:
        val = format(value, ".4f") if isinstance(value, float) else str(value)
        rendered.append((label, kind, difficulty, metric, val))
    widths = [max(len(r[i]) for r in rendered) for i in range(len(REPORT_COLUMNS))]
    lines = []
    for i, row in enumerate(rendered):
        lines.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
        if i == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"
