"""Foreground masks from mean depth, and pooling restricted to them.

Objects sit in front of their background, so thresholding a patch at
(mean depth + offset) separates the two. Pooling features over the
foreground pixels only keeps background activations out of the pooled
descriptor.
"""

import numpy as np

from patch3d import (
    DepthPatch,
    grid_function,
    make_foreground_mask,
    mask_global_pool,
    random_mlp,
)

# An 8x8 patch: an object around 5 m occupying the lower-left block
# (with some surface relief), 20 m wall behind it.
rng = np.random.default_rng(2)
values = np.full((8, 8), 20.0)
values[4:, :4] = 5.0 + rng.uniform(0.0, 0.8, size=(4, 4))
patch = DepthPatch(values)

mask = make_foreground_mask(patch, offset=0.0)
print("depth patch (m):")
print(np.round(values, 2))
print("\nforeground mask at offset 0 (threshold = mean = %.2f m):"
      % values.mean())
print(mask.astype(int))

# A larger offset admits pixels near the threshold; here it floods the
# whole patch.
flood = make_foreground_mask(patch, offset=20.0)
print("\noffset 20 m floods all valid pixels:", bool(flood.all()))

# Pool a random feature map both ways. Max pooling over the mask can
# only see foreground activations.
feats = np.maximum(rng.normal(size=(8, 8, 6)), 0.0)
masked = mask_global_pool(feats, mask, mode="max")
standard = mask_global_pool(feats, np.ones((8, 8), dtype=bool), mode="max")
print("\nper-feature max over foreground:", np.round(masked, 3))
print("per-feature max over everything: ", np.round(standard, 3))
print("masked never exceeds standard:", bool(np.all(masked <= standard)))

# The same mask drives the full grid network: 1x1 conv features, mask
# pooling, then the output MLP.
h = random_mlp((1, 16, 32), rng, output_activation="relu")
gamma = random_mlp((32, 8, 4), rng)
tensor = values[..., None]  # single z channel
print("\ngrid function with mask pooling:",
      np.round(grid_function(tensor, h, gamma, mask=mask, mode="max"), 4))
print("grid function with avg pooling: ",
      np.round(grid_function(tensor, h, gamma, mask=mask, mode="avg"), 4))

# An all-background mask raises rather than silently producing garbage;
# the conventional recovery is to warn and pool over the full grid.
import warnings

from patch3d.errors import EmptyForegroundError

empty = np.zeros((8, 8), dtype=bool)
try:
    grid_function(tensor, h, gamma, mask=empty)
except EmptyForegroundError:
    warnings.warn("empty foreground mask; falling back to full-grid pooling")
    fallback = grid_function(tensor, h, gamma, mask=None)
    print("\nfallback over the full grid:", np.round(fallback, 4))
