"""One depth patch, two representations with the same information.

A depth crop can be organised as an image-grid tensor (n x n pixels with
channels) or flattened into an unordered point set. This script builds
the four channel configurations ({z}, {x,z}, {x,y,z}, {u,v,z}) from one
synthetic patch and shows that grid and point set are interconvertible
without loss.
"""

import numpy as np

from patch3d import (
    CameraIntrinsics,
    ChannelConfig,
    DepthPatch,
    build_patch_tensor,
    patch_to_pointset,
    resample_patch,
)

rng = np.random.default_rng(0)
intr = CameraIntrinsics(fu=721.5377, fv=721.5377, cx=609.5593, cy=172.854)

# A 20x14 crop whose left half is a near object (8 m) over background
# (28 m), with a few invalid pixels (depth 0) sprinkled in.
values = np.full((14, 20), 28.0)
values[3:11, 2:9] = 8.0
values[rng.random((14, 20)) < 0.05] = 0.0
patch = DepthPatch(values, origin_u=600, origin_v=160)
print(f"raw patch: {patch.height}x{patch.width} at image origin "
      f"({patch.origin_u}, {patch.origin_v})")

# Resample to a fixed side with nearest neighbour: no invented depths.
patch = resample_patch(patch, 8)
print("resampled to 8x8; depth values still a subset of the originals:",
      np.all(np.isin(patch.values, values)))

for config in ChannelConfig:
    tensor = build_patch_tensor(patch, intr, config)
    print(f"\nconfig {config.value!r}: tensor shape {tensor.data.shape}")
    print("  centre pixel channels:", np.round(tensor.data[4, 4], 3))

# The depth channel is always the raw patch, whatever the configuration.
xyz = build_patch_tensor(patch, intr, ChannelConfig.XYZ)
print("\ndepth channel identical to raw patch:",
      np.array_equal(xyz.data[..., -1], patch.values))

# Flattening to a point set keeps every pixel vector; reshaping the list
# row-major rebuilds the tensor bit for bit -- nothing is gained or lost
# by the choice of organisation.
points = patch_to_pointset(xyz)
print("point set shape:", points.shape)
print("tensor rebuilt from points exactly:",
      np.array_equal(points.reshape(8, 8, 3), xyz.data))

# Dropping invalid pixels is available for consumers that want pure
# geometry; here the zero-depth pixels disappear.
kept = patch_to_pointset(xyz, drop_invalid=True)
print("points after dropping invalid pixels:", kept.shape[0], "of", points.shape[0])
