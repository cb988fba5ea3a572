"""Oriented 3D boxes: corners, BEV footprints, rotated IoU and regression losses.

Conventions (camera frame, y pointing down):
  * (x, y, z) is the centre of the box *bottom* face, so the box spans
    [y - h, y] vertically;
  * h, w, l are height, width and length in metres, with l along the
    box's local x axis and w along its local z axis before rotation;
  * theta is the yaw about the vertical (y) axis, stored in (-pi, pi].

Bird's-eye-view (BEV) footprints live in the ground plane with axes
(x, z). Corner order is fixed: bottom face first, counter-clockwise in
BEV starting from (+l/2, +w/2) in the unrotated frame (indices 0-3),
then the top face in the same order (indices 4-7).

Rotated-rectangle intersection uses Sutherland-Hodgman clipping with
half-plane orientation tests; :func:`monte_carlo_iou_bev` provides an
independent randomized cross-check of the analytic BEV IoU.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

# on-edge tolerance for the half-plane tests during clipping
_CLIP_EPS = 1e-12

_CORNER_X_SIGNS = np.array([1.0, -1.0, -1.0, 1.0])
_CORNER_Z_SIGNS = np.array([1.0, 1.0, -1.0, -1.0])


def wrap_angle(a: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    r = (a + math.pi) % (2.0 * math.pi) - math.pi
    return math.pi if r == -math.pi else r


@dataclass
class Box3D:
    """7-parameter oriented box; theta is normalised on construction."""

    x: float
    y: float
    z: float
    h: float
    w: float
    l: float
    theta: float = 0.0

    def __post_init__(self):
        if not (self.h > 0 and self.w > 0 and self.l > 0):
            raise ValueError(
                f"box extents must be positive, got h={self.h}, w={self.w}, l={self.l}"
            )
        vals = (self.x, self.y, self.z, self.h, self.w, self.l, self.theta)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError(f"box parameters must be finite, got {vals}")
        self.theta = wrap_angle(self.theta)

    @property
    def volume(self) -> float:
        return self.h * self.w * self.l


def corners(box: Box3D) -> np.ndarray:
    """The 8 box corners, shape (8, 3), in the documented fixed order."""
    c, s = math.cos(box.theta), math.sin(box.theta)
    lx = _CORNER_X_SIGNS * (box.l / 2.0)
    lz = _CORNER_Z_SIGNS * (box.w / 2.0)
    gx = box.x + lx * c + lz * s
    gz = box.z - lx * s + lz * c
    out = np.empty((8, 3))
    out[:4, 0] = gx
    out[:4, 1] = box.y
    out[:4, 2] = gz
    out[4:, 0] = gx
    out[4:, 1] = box.y - box.h
    out[4:, 2] = gz
    return out


def bev_polygon(box: Box3D) -> np.ndarray:
    """Ground-plane footprint: the 4 bottom corners as (x, z), CCW."""
    return corners(box)[:4, [0, 2]]


def polygon_area(poly) -> float:
    """Signed shoelace area; positive for counter-clockwise vertices."""
    poly = np.asarray(poly, dtype=np.float64)
    if len(poly) < 3:
        return 0.0
    x, z = poly[:, 0], poly[:, 1]
    return 0.5 * float(np.dot(x, np.roll(z, -1)) - np.dot(z, np.roll(x, -1)))


def polygon_intersection(subject, clip) -> np.ndarray:
    """Intersection of two convex CCW polygons (Sutherland-Hodgman).

    Returns the clipped vertex array, possibly empty. Points within
    1e-12 of a clipping edge count as inside, so a polygon clipped by
    itself comes back unchanged.
    """
    output = [np.asarray(p, dtype=np.float64) for p in subject]
    clip = np.asarray(clip, dtype=np.float64)

    for i in range(len(clip)):
        if not output:
            break
        a, b = clip[i], clip[(i + 1) % len(clip)]
        edge = b - a

        def side(p):
            return edge[0] * (p[1] - a[1]) - edge[1] * (p[0] - a[0])

        current, output = output, []
        s = current[-1]
        s_in = side(s) >= -_CLIP_EPS
        for e in current:
            e_in = side(e) >= -_CLIP_EPS
            if e_in != s_in:
                output.append(_line_intersect(s, e, a, b))
            if e_in:
                output.append(e)
            s, s_in = e, e_in
    return np.array(output) if output else np.zeros((0, 2))


def _line_intersect(s, e, a, b):
    """Intersection of segment (s, e) with the infinite line through (a, b)."""
    d1 = e - s
    d2 = b - a
    denom = d1[0] * d2[1] - d1[1] * d2[0]
    t = ((a[0] - s[0]) * d2[1] - (a[1] - s[1]) * d2[0]) / denom
    return s + t * d1


def _ordered_pair(a: Box3D, b: Box3D):
    """Canonical argument order so IoU is exactly symmetric: clipping A by B
    and B by A agree only to rounding, so both orders must run the same way."""
    ka = (a.x, a.y, a.z, a.h, a.w, a.l, a.theta)
    kb = (b.x, b.y, b.z, b.h, b.w, b.l, b.theta)
    return (a, b) if ka <= kb else (b, a)


def iou_bev(a: Box3D, b: Box3D) -> float:
    """Rotated-rectangle IoU of the two ground-plane footprints, in [0, 1]."""
    a, b = _ordered_pair(a, b)
    pa, pb = bev_polygon(a), bev_polygon(b)
    inter = polygon_area(polygon_intersection(pa, pb))
    union = polygon_area(pa) + polygon_area(pb) - inter
    if union <= 0.0:
        return 0.0
    return min(max(inter / union, 0.0), 1.0)


def iou_3d(a: Box3D, b: Box3D) -> float:
    """Volumetric IoU: BEV intersection times the vertical overlap, in [0, 1]."""
    a, b = _ordered_pair(a, b)
    inter_bev = polygon_area(polygon_intersection(bev_polygon(a), bev_polygon(b)))
    overlap_y = min(a.y, b.y) - max(a.y - a.h, b.y - b.h)
    inter = inter_bev * max(0.0, overlap_y)
    union = a.volume + b.volume - inter
    if union <= 0.0:
        return 0.0
    return min(max(inter / union, 0.0), 1.0)


def smooth_l1(r):
    """Elementwise smooth-L1 with the quadratic/linear transition at 1."""
    a = np.abs(np.asarray(r, dtype=np.float64))
    return np.where(a < 1.0, 0.5 * a * a, a - 0.5)


def corner_loss(pred: Box3D, gt: Box3D) -> float:
    """Smooth-L1 distance summed over the 8 corresponding corners.

    Minimised over the ground truth and its pi-heading flip, so a
    prediction that differs only by a 180-degree heading costs nothing.
    """
    cp = corners(pred)
    flipped = Box3D(gt.x, gt.y, gt.z, gt.h, gt.w, gt.l, gt.theta + math.pi)
    return min(
        float(smooth_l1(cp - corners(gt)).sum()),
        float(smooth_l1(cp - corners(flipped)).sum()),
    )


class DetectionLoss(NamedTuple):
    total: float
    center: float
    size: float
    heading: float
    corner: float


def detection_loss(pred: Box3D, gt: Box3D, corner_weight: float = 10.0) -> DetectionLoss:
    """Box regression loss: centre + size + heading + weight * corner terms.

    Centre and size terms are smooth-L1 on the coordinate and extent
    residuals; the heading term is smooth-L1 on the angle residual
    wrapped to (-pi, pi].
    """
    center = float(smooth_l1([pred.x - gt.x, pred.y - gt.y, pred.z - gt.z]).sum())
    size = float(smooth_l1([pred.h - gt.h, pred.w - gt.w, pred.l - gt.l]).sum())
    heading = float(smooth_l1(wrap_angle(pred.theta - gt.theta)))
    corner = corner_loss(pred, gt)
    total = center + size + heading + corner_weight * corner
    return DetectionLoss(total, center, size, heading, corner)


def _in_footprint(pts: np.ndarray, box: Box3D) -> np.ndarray:
    """Boolean mask: which (x, z) points fall inside the box footprint."""
    c, s = math.cos(box.theta), math.sin(box.theta)
    dx = pts[:, 0] - box.x
    dz = pts[:, 1] - box.z
    local_x = dx * c - dz * s
    local_z = dx * s + dz * c
    return (np.abs(local_x) <= box.l / 2.0) & (np.abs(local_z) <= box.w / 2.0)


def monte_carlo_iou_bev(a: Box3D, b: Box3D, samples: int = 1_000_000,
                        seed: int = 0) -> float:
    """BEV IoU estimated by uniform sampling over the joint bounding box.

    Independent of the polygon-clipping path: each sample is tested
    against both footprints directly, and IoU is hits-in-both over
    hits-in-either.
    """
    footprints = np.vstack([bev_polygon(a), bev_polygon(b)])
    lo = footprints.min(axis=0)
    hi = footprints.max(axis=0)
    rng = np.random.default_rng(seed)
    pts = rng.uniform(lo, hi, size=(samples, 2))
    in_a = _in_footprint(pts, a)
    in_b = _in_footprint(pts, b)
    either = int(np.count_nonzero(in_a | in_b))
    if either == 0:
        return 0.0
    return float(np.count_nonzero(in_a & in_b) / either)
