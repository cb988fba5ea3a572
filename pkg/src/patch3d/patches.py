"""Depth-patch representations: image-grid tensors, point sets, foreground masks.

A depth patch is a rectangular crop of a depth map. The same patch can be
organised two ways that carry identical information:

  * a channel tensor on the pixel grid, shape (n, n, C), channels chosen by
    :class:`ChannelConfig` -- {z}, {x, z}, {x, y, z} or {u, v, z};
  * an unordered point set, shape (n*n, C), obtained by flattening the grid.

Pixel (row, col) of a patch has absolute image coordinates
(origin_u + col, origin_v + row); those absolute coordinates feed the
camera back-projection and the raw-coordinate (u, v, z) channels. A depth
of exactly 0 marks an invalid pixel throughout.
"""

import io
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .camera import CameraIntrinsics, backproject
from .errors import EmptyInputError, ParseError, ShapeError


class ChannelConfig(Enum):
    """Which per-pixel values the patch tensor carries."""

    Z = "z"
    XZ = "xz"
    XYZ = "xyz"
    UVZ = "uvz"

    @property
    def num_channels(self) -> int:
        return {"z": 1, "xz": 2, "xyz": 3, "uvz": 3}[self.value]

    @classmethod
    def from_string(cls, s: str) -> "ChannelConfig":
        try:
            return cls(s.lower())
        except ValueError:
            raise ValueError(f"unknown channel config {s!r}; expected one of "
                             f"{[c.value for c in cls]}") from None


@dataclass
class DepthPatch:
    """A depth crop in metres. values has shape (height, width); 0 = invalid."""

    values: np.ndarray
    origin_u: int = 0
    origin_v: int = 0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2:
            raise ShapeError(f"patch values must be 2-D, got shape {self.values.shape}")
        if np.any(self.values < 0):
            raise ValueError("depth values must be non-negative (0 marks invalid)")

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]


@dataclass
class PatchTensor:
    """Channel tensor on the pixel grid, shape (n, n, C), channels-last."""

    data: np.ndarray
    config: ChannelConfig

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.float64)
        if self.data.ndim != 3 or self.data.shape[0] != self.data.shape[1]:
            raise ShapeError(f"tensor must be (n, n, C), got shape {self.data.shape}")
        if self.data.shape[2] != self.config.num_channels:
            raise ShapeError(
                f"config {self.config.value!r} needs {self.config.num_channels} "
                f"channels, got {self.data.shape[2]}"
            )

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def num_channels(self) -> int:
        return self.data.shape[2]


def resample_patch(patch: DepthPatch, n: int) -> DepthPatch:
    """Resample a patch to n x n by nearest neighbour.

    Every output value is copied from some input pixel; no depths are
    invented at object boundaries. The origin is preserved.
    """
    if n < 1:
        raise ValueError(f"target side must be >= 1, got {n}")
    if patch.values.size == 0:
        raise EmptyInputError("cannot resample an empty patch")
    h, w = patch.values.shape
    rows = np.minimum((np.arange(n) + 0.5) * h / n, h - 1).astype(np.intp)
    cols = np.minimum((np.arange(n) + 0.5) * w / n, w - 1).astype(np.intp)
    return DepthPatch(
        values=patch.values[np.ix_(rows, cols)].copy(),
        origin_u=patch.origin_u,
        origin_v=patch.origin_v,
    )


def build_patch_tensor(
    patch: DepthPatch,
    intr: CameraIntrinsics,
    config: ChannelConfig = ChannelConfig.XYZ,
    rectified: bool = False,
) -> PatchTensor:
    """Build the channel tensor for a (square, already resampled) patch.

    XYZ/XZ channels come from back-projecting each valid pixel's absolute
    image coordinates through the camera model; UVZ carries the raw
    absolute coordinates instead. Invalid pixels (depth 0) contribute
    all-zero channel vectors.
    """
    if patch.height != patch.width:
        raise ShapeError(
            f"patch must be square before tensor building, got "
            f"{patch.height}x{patch.width}; apply resample_patch first"
        )
    n = patch.height
    d = patch.values
    valid = d > 0
    data = np.zeros((n, n, config.num_channels), dtype=np.float64)

    vv, vu = np.nonzero(valid)
    abs_u = patch.origin_u + vu.astype(np.float64)
    abs_v = patch.origin_v + vv.astype(np.float64)
    dep = d[valid]

    if config is ChannelConfig.Z:
        data[..., 0] = d
    elif config is ChannelConfig.UVZ:
        data[vv, vu, 0] = abs_u
        data[vv, vu, 1] = abs_v
        data[vv, vu, 2] = dep
    else:
        if dep.size:
            x, y, z = backproject(abs_u, abs_v, dep, intr, rectified=rectified)
        else:
            x = y = z = np.zeros(0)
        if config is ChannelConfig.XZ:
            data[vv, vu, 0] = x
            data[vv, vu, 1] = z
        else:  # XYZ
            data[vv, vu, 0] = x
            data[vv, vu, 1] = y
            data[vv, vu, 2] = z
    return PatchTensor(data=data, config=config)


def patch_to_pointset(tensor: PatchTensor, drop_invalid: bool = False) -> np.ndarray:
    """Flatten a patch tensor to an unordered point set, shape (M, C).

    Points appear in row-major pixel order, so with drop_invalid=False the
    mapping is a bijection: points.reshape(n, n, C) reconstructs the tensor
    exactly. The depth channel is last in every config, so invalid pixels
    are the rows whose last component is 0.
    """
    points = tensor.data.reshape(-1, tensor.num_channels).copy()
    if drop_invalid:
        points = points[points[:, -1] > 0]
    return points


def make_foreground_mask(patch: DepthPatch, offset: float = 0.0) -> np.ndarray:
    """Threshold a patch into a boolean foreground mask.

    The threshold is mean(valid depths) + offset; pixels with
    0 < depth < threshold are foreground. Strict inequality means a
    uniform patch at offset 0 has no foreground.

    The mask only restricts pooling (see setfunc.mask_global_pool);
    background pixels are deliberately never zeroed out of the input
    tensor itself, so they stay available as context.
    """
    valid = patch.values > 0
    if not valid.any():
        raise EmptyInputError("patch has no valid pixels; cannot build a mask")
    threshold = patch.values[valid].mean() + offset
    return valid & (patch.values < threshold)


# --- textual dump format ---------------------------------------------------
#
# patch-tensor v1
# n <side> channels <C> config <tag>
# <n*n lines of C values, row-major, full float precision>

_MAGIC = "patch-tensor v1"


def dump_patch_tensor(tensor: PatchTensor) -> str:
    out = io.StringIO()
    out.write(f"{_MAGIC}\n")
    out.write(f"n {tensor.n} channels {tensor.num_channels} config {tensor.config.value}\n")
    for px in tensor.data.reshape(-1, tensor.num_channels):
        out.write(" ".join(format(v, ".17g") for v in px) + "\n")
    return out.getvalue()


def parse_patch_tensor(text: str) -> PatchTensor:
    lines = text.splitlines()
    if not lines or lines[0].strip() != _MAGIC:
        raise ParseError(f"expected header {_MAGIC!r}")
    fields = lines[1].split() if len(lines) > 1 else []
    if len(fields) != 6 or fields[0] != "n" or fields[2] != "channels" or fields[4] != "config":
        raise ParseError(f"malformed tensor header: {lines[1]!r}")
    n, c = int(fields[1]), int(fields[3])
    config = ChannelConfig.from_string(fields[5])
    body = [ln for ln in lines[2:] if ln.strip()]
    if len(body) != n * n:
        raise ParseError(f"expected {n * n} value rows, got {len(body)}")
    try:
        data = np.array([[float(v) for v in ln.split()] for ln in body])
    except ValueError as e:
        raise ParseError(f"bad value row: {e}") from None
    if data.shape != (n * n, c):
        raise ParseError(f"expected {c} values per row, got shape {data.shape}")
    return PatchTensor(data=data.reshape(n, n, c), config=config)


def dump_pointset(points: np.ndarray) -> str:
    points = np.asarray(points, dtype=np.float64)
    out = io.StringIO()
    out.write("point-set v1\n")
    out.write(f"count {points.shape[0]} dim {points.shape[1]}\n")
    for row in points:
        out.write(" ".join(format(v, ".17g") for v in row) + "\n")
    return out.getvalue()


def parse_pointset(text: str) -> np.ndarray:
    lines = text.splitlines()
    if not lines or lines[0].strip() != "point-set v1":
        raise ParseError("expected header 'point-set v1'")
    fields = lines[1].split() if len(lines) > 1 else []
    if len(fields) != 4 or fields[0] != "count" or fields[2] != "dim":
        raise ParseError(f"malformed point-set header: {lines[1]!r}")
    count, dim = int(fields[1]), int(fields[3])
    body = [ln for ln in lines[2:] if ln.strip()]
    if len(body) != count:
        raise ParseError(f"expected {count} point rows, got {len(body)}")
    data = np.array([[float(v) for v in ln.split()] for ln in body])
    data = data.reshape(count, dim) if count else np.zeros((0, dim))
    return data
