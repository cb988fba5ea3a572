"""Rotated-box IoU (analytic vs Monte-Carlo) and the regression losses.

BEV IoU clips one rotated footprint against the other and measures
areas with the shoelace formula; the Monte-Carlo estimate never touches
that code path, so agreement between the two is a real check.
"""

import math

import numpy as np

from patch3d import Box3D, corner_loss, detection_loss, iou_3d, iou_bev, monte_carlo_iou_bev

unit = Box3D(x=0, y=0, z=0, h=1, w=1, l=1, theta=0)

print("analytic fixtures:")
print("  identical boxes:       ", iou_bev(unit, unit))
print("  offset 0.5 in x:       ", iou_bev(unit, Box3D(0.5, 0, 0, 1, 1, 1, 0)),
      "(exactly 1/3)")
rotated = Box3D(0, 0, 0, 1, 1, 1, math.pi / 4)
print("  square vs 45deg square:", iou_bev(unit, rotated),
      f"(exactly 1/sqrt(2) = {1 / math.sqrt(2):.6f})")

print("\nanalytic vs Monte-Carlo on random pairs:")
rng = np.random.default_rng(3)
print(f"  {'analytic':>9} {'sampled':>9} {'diff':>9}")
for i in range(6):
    a = Box3D(rng.uniform(-1, 1), 0, rng.uniform(-1, 1),
              1.5, rng.uniform(0.8, 2), rng.uniform(1, 4),
              rng.uniform(-math.pi, math.pi))
    b = Box3D(a.x + rng.uniform(-1, 1), 0, a.z + rng.uniform(-1, 1),
              1.5, rng.uniform(0.8, 2), rng.uniform(1, 4),
              rng.uniform(-math.pi, math.pi))
    ana = iou_bev(a, b)
    mc = monte_carlo_iou_bev(a, b, samples=400_000, seed=i)
    print(f"  {ana:9.5f} {mc:9.5f} {abs(ana - mc):9.5f}")

# 3D IoU multiplies the footprint intersection by the vertical overlap.
stacked = Box3D(0, -0.5, 0, 1, 1, 1, 0)  # same footprint, half a box higher
print("\n3d IoU with half vertical overlap:", iou_3d(unit, stacked),
      "(1/3: inter 0.5, union 1.5)")

# Losses: smooth-L1 on centre / size / heading residuals plus a corner
# term that forgives 180-degree heading flips.
gt = Box3D(x=1.0, y=1.5, z=20.0, h=1.5, w=1.6, l=3.9, theta=0.3)
flip = Box3D(1.0, 1.5, 20.0, 1.5, 1.6, 3.9, 0.3 + math.pi)
near = Box3D(1.1, 1.45, 20.3, 1.4, 1.7, 4.0, 0.35)

print("\ncorner loss, prediction == gt:        ", corner_loss(gt, gt))
print("corner loss, heading flipped by pi:   ", corner_loss(flip, gt))
print("corner loss, slightly off:             %.5f" % corner_loss(near, gt))

loss = detection_loss(near, gt, corner_weight=10.0)
print("\ndetection loss breakdown for the slightly-off prediction:")
print(f"  center  {loss.center:.5f}")
print(f"  size    {loss.size:.5f}")
print(f"  heading {loss.heading:.5f}")
print(f"  corner  {loss.corner:.5f}  (weighted x10 in the total)")
print(f"  total   {loss.total:.5f}")
