"""Pinhole camera model: image pixels with depth to 3D points and back.

Coordinate conventions (rectified camera frame, KITTI-style):
  image:  u grows right, v grows down, origin at the top-left corner
  camera: x right, y down, z forward; depth d is the z coordinate in metres

Back-projection of a pixel (u, v) with depth d:
    z = d
    x = (u - cx) * z / fu
    y = (v - cy) * z / fv

This is the bare pinhole model. Calibration files may carry translation
terms in the fourth column of the projection matrix (stereo baselines);
those are stored on :class:`CameraIntrinsics` and applied only when
``rectified=True`` is passed, in which case the back-projection becomes
x = (u - cx) * z / fu - tx / fu (and likewise for y). The default ignores
them, which is exact for the reference camera.

All operations are pure and accept scalars or numpy arrays of matching
shape; arrays are processed elementwise.
"""

from dataclasses import dataclass

import numpy as np

from .errors import BehindCameraError, InvalidDepthError, MalformedCalibrationError


@dataclass(frozen=True)
class CameraIntrinsics:
    """Focal lengths, principal point and baseline terms, all in pixels
    (tx, ty are in metre*pixel units, taken from a projection matrix)."""

    fu: float
    fv: float
    cx: float
    cy: float
    tx: float = 0.0
    ty: float = 0.0

    def __post_init__(self):
        if not (self.fu > 0 and self.fv > 0):
            raise MalformedCalibrationError(
                f"focal lengths must be positive, got fu={self.fu}, fv={self.fv}"
            )
        if not (np.isfinite(self.cx) and np.isfinite(self.cy)):
            raise MalformedCalibrationError(
                f"principal point must be finite, got ({self.cx}, {self.cy})"
            )


def intrinsics_from_projection_matrix(m) -> CameraIntrinsics:
    """Extract intrinsics from a row-major 3x4 projection matrix.

    fu = m[0][0], fv = m[1][1], cx = m[0][2], cy = m[1][2], and the
    fourth-column terms tx = m[0][3], ty = m[1][3].
    """
    m = np.asarray(m, dtype=np.float64)
    if m.shape != (3, 4):
        raise MalformedCalibrationError(f"expected a 3x4 matrix, got shape {m.shape}")
    if m[0, 0] <= 0 or m[1, 1] <= 0:
        raise MalformedCalibrationError(
            f"projection matrix diagonal must be positive, got {m[0, 0]}, {m[1, 1]}"
        )
    return CameraIntrinsics(
        fu=float(m[0, 0]),
        fv=float(m[1, 1]),
        cx=float(m[0, 2]),
        cy=float(m[1, 2]),
        tx=float(m[0, 3]),
        ty=float(m[1, 3]),
    )


def backproject(u, v, d, intr: CameraIntrinsics, rectified: bool = False):
    """Map pixel coordinates plus depth to camera-frame (x, y, z).

    Args:
        u, v: pixel column / row (scalars or arrays, may be fractional)
        d: depth in metres; must be strictly positive
        intr: camera intrinsics
        rectified: apply the projection-matrix translation terms

    Returns:
        (x, y, z) as float64 scalars/arrays matching the input shape.
    """
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    d = np.asarray(d, dtype=np.float64)
    if np.any(d <= 0):
        raise InvalidDepthError("depth must be strictly positive")
    z = d
    x = (u - intr.cx) * z / intr.fu
    y = (v - intr.cy) * z / intr.fv
    if rectified:
        x = x - intr.tx / intr.fu
        y = y - intr.ty / intr.fv
    return x, y, z + np.zeros_like(x)


def project(x, y, z, intr: CameraIntrinsics, rectified: bool = False):
    """Inverse of :func:`backproject`: camera-frame point to (u, v, d).

    Raises BehindCameraError for z <= 0.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    if np.any(z <= 0):
        raise BehindCameraError("cannot project points with z <= 0")
    if rectified:
        x = x + intr.tx / intr.fu
        y = y + intr.ty / intr.fv
    u = x * intr.fu / z + intr.cx
    v = y * intr.fv / z + intr.cy
    return u, v, z + np.zeros_like(u)
