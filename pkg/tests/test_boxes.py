"""Oriented-box geometry tests: corners, clipping, IoU, losses.

Analytic expectations come from hand geometry (axis-aligned overlaps,
the 45-degree square-on-square octagon whose IoU is exactly 1/sqrt(2));
random rotated pairs are cross-checked against the Monte-Carlo
rasterisation oracle, which never touches the clipping code.
"""

import math

import numpy as np
import pytest

from patch3d import (
    Box3D,
    bev_polygon,
    corner_loss,
    corners,
    detection_loss,
    iou_3d,
    iou_bev,
    monte_carlo_iou_bev,
    polygon_area,
    polygon_intersection,
    smooth_l1,
    wrap_angle,
)


def random_box_pair(rng):
    """A pair of nearby random boxes; offsets small enough to overlap often."""
    a = Box3D(
        x=rng.uniform(-2, 2), y=rng.uniform(-1, 1), z=rng.uniform(8, 12),
        h=rng.uniform(0.5, 2.5), w=rng.uniform(0.5, 2.5), l=rng.uniform(0.5, 4.5),
        theta=rng.uniform(-math.pi, math.pi),
    )
    b = Box3D(
        x=a.x + rng.uniform(-1.5, 1.5), y=a.y + rng.uniform(-0.5, 0.5),
        z=a.z + rng.uniform(-1.5, 1.5),
        h=rng.uniform(0.5, 2.5), w=rng.uniform(0.5, 2.5), l=rng.uniform(0.5, 4.5),
        theta=rng.uniform(-math.pi, math.pi),
    )
    return a, b


class TestCorners:
    def test_unit_cube_at_origin(self):
        pts = corners(Box3D(0, 0, 0, 1, 1, 1, 0))
        assert pts.shape == (8, 3)
        assert set(map(tuple, pts[:, [0, 2]])) == {
            (0.5, 0.5), (-0.5, 0.5), (-0.5, -0.5), (0.5, -0.5)}
        assert np.array_equal(pts[:4, 1], np.zeros(4))
        assert np.array_equal(pts[4:, 1], -np.ones(4))

    def test_documented_corner_order(self):
        # bottom CCW from (+l/2, +w/2), then the top face in the same order
        pts = corners(Box3D(0, 0, 0, 2, 1, 4, 0))
        np.testing.assert_array_equal(pts[0], [2.0, 0.0, 0.5])
        np.testing.assert_array_equal(pts[1], [-2.0, 0.0, 0.5])
        np.testing.assert_array_equal(pts[2], [-2.0, 0.0, -0.5])
        np.testing.assert_array_equal(pts[3], [2.0, 0.0, -0.5])
        np.testing.assert_array_equal(pts[4:, [0, 2]], pts[:4, [0, 2]])
        np.testing.assert_array_equal(pts[4:, 1], pts[:4, 1] - 2.0)

    def test_half_turn_gives_same_corner_multiset(self):
        base = corners(Box3D(1, 2, 3, 1, 1, 2, 0.0))
        flipped = corners(Box3D(1, 2, 3, 1, 1, 2, math.pi))
        order = np.lexsort(base.T)
        order_f = np.lexsort(flipped.T)
        np.testing.assert_allclose(flipped[order_f], base[order], atol=1e-12)
        # and the ordered corners are the originals rotated by two positions
        np.testing.assert_allclose(flipped[:4], base[[2, 3, 0, 1]], atol=1e-12)

    def test_quarter_turn_swaps_extents(self):
        pts = corners(Box3D(0, 0, 0, 1, 1, 2, math.pi / 2))
        assert np.abs(pts[:, 0]).max() == pytest.approx(0.5, abs=1e-12)
        assert np.abs(pts[:, 2]).max() == pytest.approx(1.0, abs=1e-12)

    def test_translation_moves_corners_rigidly(self):
        base = corners(Box3D(0, 0, 0, 1.2, 0.8, 3.0, 0.7))
        moved = corners(Box3D(5, -2, 11, 1.2, 0.8, 3.0, 0.7))
        np.testing.assert_allclose(moved - base, np.tile([5, -2, 11], (8, 1)),
                                   atol=1e-12)


class TestBevPolygon:
    def test_axis_aligned_rectangle(self):
        poly = bev_polygon(Box3D(0, 0, 0, 1, 1, 2, 0))
        np.testing.assert_array_equal(
            poly, [[1, 0.5], [-1, 0.5], [-1, -0.5], [1, -0.5]])

    def test_area_is_l_times_w_for_any_theta(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            w, l = rng.uniform(0.5, 4, size=2)
            theta = rng.uniform(-math.pi, math.pi)
            poly = bev_polygon(Box3D(0, 0, 0, 1, w, l, theta))
            assert polygon_area(poly) == pytest.approx(l * w, rel=1e-12)

    def test_counter_clockwise(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            box = Box3D(rng.normal(), 0, rng.normal(), 1,
                        rng.uniform(0.5, 2), rng.uniform(0.5, 2),
                        rng.uniform(-math.pi, math.pi))
            assert polygon_area(bev_polygon(box)) > 0

    def test_unit_square_rotated_45_degrees(self):
        poly = bev_polygon(Box3D(0, 0, 0, 1, 1, 1, math.pi / 4))
        dists = np.hypot(poly[:, 0], poly[:, 1])
        np.testing.assert_allclose(dists, math.sqrt(2) / 2, atol=1e-12)
        # the rotated vertices land on the axes
        assert np.abs(poly).min() < 1e-12


class TestPolygonIntersection:
    SQUARE = np.array([[1.0, 1.0], [-1.0, 1.0], [-1.0, -1.0], [1.0, -1.0]])

    def test_self_intersection_is_identity(self):
        inter = polygon_intersection(self.SQUARE, self.SQUARE)
        assert abs(polygon_area(inter) - 4.0) < 1e-12

    def test_disjoint_squares(self):
        far = self.SQUARE + [10.0, 0.0]
        inter = polygon_intersection(self.SQUARE, far)
        assert polygon_area(inter) == 0.0

    def test_half_overlapping_unit_squares(self):
        unit = self.SQUARE * 0.5
        inter = polygon_intersection(unit, unit + [0.5, 0.0])
        assert polygon_area(inter) == pytest.approx(0.5, abs=1e-12)

    def test_contained_polygon(self):
        small = self.SQUARE * 0.25
        assert polygon_area(polygon_intersection(small, self.SQUARE)) == \
            pytest.approx(0.25, abs=1e-12)
        assert polygon_area(polygon_intersection(self.SQUARE, small)) == \
            pytest.approx(0.25, abs=1e-12)

    def test_degenerate_input_gives_zero_area(self):
        line = np.array([[0.0, 0.0], [1.0, 0.0]])
        assert polygon_area(polygon_intersection(line, self.SQUARE)) == 0.0
        assert polygon_area(polygon_intersection(self.SQUARE, line)) <= 1e-12


class TestIouBev:
    def test_identical_boxes(self):
        box = Box3D(3, 1, 20, 1.5, 1.6, 3.9, 0.3)
        assert iou_bev(box, box) == 1.0

    def test_half_offset_unit_squares(self):
        a = Box3D(0, 0, 0, 1, 1, 1, 0)
        b = Box3D(0.5, 0, 0, 1, 1, 1, 0)
        assert iou_bev(a, b) == pytest.approx(1 / 3, abs=1e-12)

    def test_rotated_square_on_square(self):
        # octagon overlap: IoU = 2(sqrt(2)-1) / (2 - 2(sqrt(2)-1)) = 1/sqrt(2)
        a = Box3D(0, 0, 0, 1, 1, 1, 0)
        b = Box3D(0, 0, 0, 1, 1, 1, math.pi / 4)
        assert iou_bev(a, b) == pytest.approx(1 / math.sqrt(2), abs=1e-12)

    def test_disjoint(self):
        a = Box3D(0, 0, 0, 1, 1, 1, 0)
        b = Box3D(10, 0, 0, 1, 1, 1, 0.4)
        assert iou_bev(a, b) == 0.0

    def test_symmetry_exact(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            a, b = random_box_pair(rng)
            assert iou_bev(a, b) == iou_bev(b, a)

    def test_bounds(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            a, b = random_box_pair(rng)
            assert 0.0 <= iou_bev(a, b) <= 1.0

    def test_rotation_invariance(self):
        rng = np.random.default_rng(4)
        a, b = random_box_pair(rng)
        base = iou_bev(a, b)
        for phi in rng.uniform(-math.pi, math.pi, size=10):
            c, s = math.cos(phi), math.sin(phi)
            def rot(box):
                x = box.x * c + box.z * s
                z = -box.x * s + box.z * c
                return Box3D(x, box.y, z, box.h, box.w, box.l, box.theta + phi)
            assert iou_bev(rot(a), rot(b)) == pytest.approx(base, abs=1e-9)

    def test_translation_invariance(self):
        rng = np.random.default_rng(5)
        a, b = random_box_pair(rng)
        base = iou_bev(a, b)
        shifted = iou_bev(
            Box3D(a.x + 7, a.y, a.z - 3, a.h, a.w, a.l, a.theta),
            Box3D(b.x + 7, b.y, b.z - 3, b.h, b.w, b.l, b.theta))
        assert shifted == pytest.approx(base, abs=1e-12)

    def test_monte_carlo_oracle_agreement(self):
        # a short sweep here; the acceptance suite runs the full 100 pairs
        rng = np.random.default_rng(6)
        for i in range(20):
            a, b = random_box_pair(rng)
            analytic = iou_bev(a, b)
            sampled = monte_carlo_iou_bev(a, b, samples=200_000, seed=i)
            assert analytic == pytest.approx(sampled, abs=0.02)


class TestIou3d:
    def test_identical_boxes(self):
        box = Box3D(-2, 1.3, 35, 1.5, 1.7, 4.1, -0.7)
        assert iou_3d(box, box) == 1.0

    def test_disjoint_vertical_extents(self):
        a = Box3D(0, 0, 0, 1, 1, 1, 0)
        b = Box3D(0, -5, 0, 1, 1, 1, 0)  # same footprint, 4 m above
        assert iou_bev(a, b) == 1.0
        assert iou_3d(a, b) == 0.0

    def test_half_offset_unit_cubes(self):
        a = Box3D(0, 0, 0, 1, 1, 1, 0)
        b = Box3D(0.5, 0, 0, 1, 1, 1, 0)
        assert iou_3d(a, b) == pytest.approx(1 / 3, abs=1e-12)

    def test_partial_vertical_overlap(self):
        # same footprint, half-height overlap: inter = 0.5, union = 1.5
        a = Box3D(0, 0, 0, 1, 1, 1, 0)
        b = Box3D(0, -0.5, 0, 1, 1, 1, 0)
        assert iou_3d(a, b) == pytest.approx(1 / 3, abs=1e-12)

    def test_symmetry_and_bounds(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            a, b = random_box_pair(rng)
            v = iou_3d(a, b)
            assert v == iou_3d(b, a)
            assert 0.0 <= v <= 1.0


class TestSmoothL1:
    def test_quadratic_branch(self):
        assert smooth_l1(0.5) == 0.125
        assert smooth_l1(-0.5) == 0.125

    def test_linear_branch(self):
        assert smooth_l1(2.0) == 1.5
        assert smooth_l1(-3.0) == 2.5

    def test_transition_point(self):
        assert smooth_l1(1.0) == 0.5


class TestCornerLoss:
    GT = Box3D(2.0, 1.0, 15.0, 1.5, 1.6, 3.9, 0.4)

    def test_zero_at_equality(self):
        assert corner_loss(self.GT, self.GT) == 0.0

    def test_heading_flip_absorbed(self):
        flipped = Box3D(2.0, 1.0, 15.0, 1.5, 1.6, 3.9, 0.4 + math.pi)
        assert corner_loss(flipped, self.GT) == 0.0

    def test_delta_shift_is_eight_smooth_l1(self):
        # every corner moves by delta in x: 8 * 0.5 * delta^2
        gt = Box3D(0, 0, 0, 1, 1, 2, 0)
        delta = 0.01
        pred = Box3D(delta, 0, 0, 1, 1, 2, 0)
        assert corner_loss(pred, gt) == pytest.approx(8 * 0.5 * delta**2, abs=1e-12)

    def test_translation_invariance(self):
        gt = Box3D(0, 0, 0, 1.2, 0.9, 3.1, 0.6)
        pred = Box3D(0.2, -0.1, 0.3, 1.0, 1.1, 2.9, 0.5)
        base = corner_loss(pred, gt)
        shift = (4.0, -2.0, 9.0)
        moved = corner_loss(
            Box3D(pred.x + shift[0], pred.y + shift[1], pred.z + shift[2],
                  pred.h, pred.w, pred.l, pred.theta),
            Box3D(gt.x + shift[0], gt.y + shift[1], gt.z + shift[2],
                  gt.h, gt.w, gt.l, gt.theta))
        assert moved == pytest.approx(base, abs=1e-9)

    def test_invariant_under_gt_heading_flip(self):
        rng = np.random.default_rng(8)
        for _ in range(20):
            pred, gt = random_box_pair(rng)
            gt_flip = Box3D(gt.x, gt.y, gt.z, gt.h, gt.w, gt.l, gt.theta + math.pi)
            assert corner_loss(pred, gt) == pytest.approx(
                corner_loss(pred, gt_flip), abs=1e-12)


class TestDetectionLoss:
    GT = Box3D(1.0, 0.5, 22.0, 1.4, 1.7, 4.0, -0.3)

    def test_zero_at_equality(self):
        loss = detection_loss(self.GT, self.GT)
        assert loss.total == 0.0
        assert loss == (0.0, 0.0, 0.0, 0.0, 0.0)

    def test_full_turn_heading_residual_wraps_to_zero(self):
        pred = Box3D(1.0, 0.5, 22.0, 1.4, 1.7, 4.0, -0.3 + 2 * math.pi)
        loss = detection_loss(pred, self.GT)
        assert loss.heading == pytest.approx(0.0, abs=1e-12)

    def test_zero_weight_sums_first_three_terms(self):
        pred = Box3D(1.3, 0.6, 21.5, 1.5, 1.6, 4.2, -0.1)
        loss = detection_loss(pred, self.GT, corner_weight=0.0)
        assert loss.total == pytest.approx(
            loss.center + loss.size + loss.heading, abs=1e-15)
        assert loss.corner > 0.0

    def test_weight_scales_corner_term(self):
        pred = Box3D(1.3, 0.6, 21.5, 1.5, 1.6, 4.2, -0.1)
        l1 = detection_loss(pred, self.GT, corner_weight=1.0)
        l10 = detection_loss(pred, self.GT, corner_weight=10.0)
        assert l10.total - l1.total == pytest.approx(9 * l1.corner, rel=1e-12)

    def test_center_term_hand_value(self):
        pred = Box3D(1.1, 0.5, 22.0, 1.4, 1.7, 4.0, -0.3)
        loss = detection_loss(pred, self.GT)
        # single 0.1 residual on the quadratic branch
        assert loss.center == pytest.approx(0.5 * 0.1**2, abs=1e-12)


class TestWrapAngle:
    def test_interval_is_half_open(self):
        assert wrap_angle(math.pi) == math.pi
        assert wrap_angle(-math.pi) == math.pi

    def test_wraps_multiples(self):
        assert wrap_angle(0.3 + 2 * math.pi) == pytest.approx(0.3, abs=1e-12)
        assert wrap_angle(0.3 - 4 * math.pi) == pytest.approx(0.3, abs=1e-12)

    def test_box_normalises_theta(self):
        box = Box3D(0, 0, 0, 1, 1, 1, 3 * math.pi)
        assert box.theta == pytest.approx(math.pi, abs=1e-12)


class TestBoxValidation:
    def test_non_positive_extent_rejected(self):
        with pytest.raises(ValueError):
            Box3D(0, 0, 0, 0.0, 1, 1, 0)
        with pytest.raises(ValueError):
            Box3D(0, 0, 0, 1, -2, 1, 0)

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            Box3D(math.nan, 0, 0, 1, 1, 1, 0)
