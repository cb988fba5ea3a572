"""Shared fixtures: a tiny synthetic KITTI-style directory tree.

Scene layout per frame: a 64x48 depth map with a 30 m background and an
8 m foreground block inside each object's 2D box, a P0/P2 calibration
file, a 15-field ground-truth label file and a 16-field prediction file
containing the same boxes with scores.
"""

import numpy as np
import pytest

from patch3d import write_depth_map

IMAGE_W, IMAGE_H = 64, 48
CALIB_LINE = ("{key}: 100.0 0.0 32.0 0.0 "
              "0.0 100.0 24.0 0.0 "
              "0.0 0.0 1.0 0.0")

# bbox height 42 px, no occlusion/truncation: easy bucket
CAR_BBOX = (10.0, 4.0, 30.0, 46.0)


def gt_line(z=15.0, bbox=CAR_BBOX, label="Car"):
    l, t, r, b = bbox
    return (f"{label} 0.00 0 0.00 {l:.2f} {t:.2f} {r:.2f} {b:.2f} "
            f"1.50 1.60 3.90 0.00 1.50 {z:.2f} 0.10")


def pred_line(z=15.0, bbox=CAR_BBOX, label="Car", score=0.9):
    return gt_line(z, bbox, label) + f" {score:.2f}"


@pytest.fixture
def kitti_tree(tmp_path):
    """Build depth/, calib/, label/ and pred/ dirs for the given frames."""

    def build(frames=("000000", "000001"), z=15.0, perfect_preds=True):
        for sub in ("depth", "calib", "label", "pred"):
            (tmp_path / sub).mkdir(exist_ok=True)
        for frame in frames:
            depth = np.full((IMAGE_H, IMAGE_W), 30.0)
            l, t, r, b = (int(v) for v in CAR_BBOX)
            depth[t + 8:b - 8, l + 4:r - 4] = 8.0  # foreground block
            write_depth_map(tmp_path / "depth" / f"{frame}.png", depth)
            (tmp_path / "calib" / f"{frame}.txt").write_text(
                CALIB_LINE.format(key="P0") + "\n"
                + CALIB_LINE.format(key="P2") + "\n")
            (tmp_path / "label" / f"{frame}.txt").write_text(gt_line(z) + "\n")
            pred = pred_line(z) + "\n" if perfect_preds else ""
            (tmp_path / "pred" / f"{frame}.txt").write_text(pred)
        return tmp_path

    return build
