"""KITTI-format file ingestion and emission.

Three disk formats are handled, all bit-exact by construction:

  * label files: whitespace-separated lines of 15 fields (ground truth)
    or 16 fields (predictions, trailing confidence score);
  * calibration files: lines of "KEY: v0 v1 ... v11", twelve decimals
    forming a row-major 3x4 projection matrix;
  * depth maps: single-channel 16-bit images where metres = raw / 256
    and a raw value of 0 marks an invalid pixel.

Prediction output re-uses the label format with the score appended, so
write -> parse -> write is idempotent text.
"""

import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .boxes import Box3D
from .errors import EmptyRoiError, FormatError, ParseError
from .evaluation import Detection, GtObject
from .patches import DepthPatch

DEPTH_SCALE = 256.0  # raw 16-bit units per metre

_DEPTH_MODES = ("I;16", "I;16B", "I;16L", "I")


@dataclass
class LabelRecord:
    """One line of a KITTI label file, fields in file order."""

    type: str
    truncated: float
    occluded: int
    alpha: float
    bbox: tuple  # (left, top, right, bottom) pixels
    dimensions: tuple  # (h, w, l) metres
    location: tuple  # (x, y, z) metres, camera frame
    rotation_y: float
    score: float | None = None


def parse_label_file(text: str) -> list[LabelRecord]:
    """Parse label text into records; raises ParseError with the line number."""
    records = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        parts = line.split()
        if not parts:
            continue
        if len(parts) not in (15, 16):
            raise ParseError(
                f"line {lineno}: expected 15 or 16 fields, got {len(parts)}"
            )
        try:
            values = [float(p) for p in parts[1:]]
        except ValueError as e:
            raise ParseError(f"line {lineno}: {e}") from None
        records.append(LabelRecord(
            type=parts[0],
            truncated=values[0],
            occluded=int(values[1]),
            alpha=values[2],
            bbox=tuple(values[3:7]),
            dimensions=tuple(values[7:10]),
            location=tuple(values[10:13]),
            rotation_y=values[13],
            score=values[14] if len(parts) == 16 else None,
        ))
    return records


def write_predictions(records) -> str:
    """Render records as 16-field prediction lines (two decimals throughout)."""
    lines = []
    for rec in records:
        if rec.score is None:
            raise ValueError(f"prediction record for {rec.type!r} has no score")
        fields = [rec.type, f"{rec.truncated:.2f}", f"{rec.occluded:d}",
                  f"{rec.alpha:.2f}"]
        fields += [f"{v:.2f}" for v in rec.bbox]
        fields += [f"{v:.2f}" for v in rec.dimensions]
        fields += [f"{v:.2f}" for v in rec.location]
        fields += [f"{rec.rotation_y:.2f}", f"{rec.score:.2f}"]
        lines.append(" ".join(fields))
    return "".join(line + "\n" for line in lines)


def parse_calib_file(text: str) -> dict:
    """Parse "KEY: 12 floats" lines into a map of key -> 3x4 matrix.

    Every key is retained; a duplicated key keeps its last occurrence and
    emits a warning. Any other value count is a format violation.
    """
    matrices = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        if ":" not in line:
            raise ParseError(f"line {lineno}: expected 'KEY: values'")
        key, _, rest = line.partition(":")
        key = key.strip()
        parts = rest.split()
        if len(parts) != 12:
            raise ParseError(
                f"line {lineno}: key {key!r} has {len(parts)} values, expected 12"
            )
        try:
            values = np.array([float(p) for p in parts], dtype=np.float64)
        except ValueError as e:
            raise ParseError(f"line {lineno}: {e}") from None
        if key in matrices:
            warnings.warn(f"duplicate calibration key {key!r}; keeping the last")
        matrices[key] = values.reshape(3, 4)
    return matrices


@dataclass
class DepthMap:
    """Decoded depth image in metres; 0 marks invalid pixels."""

    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]


def read_depth_map(path) -> DepthMap:
    """Decode a single-channel 16-bit depth image (metres = raw / 256)."""
    try:
        img = Image.open(path)
    except (UnidentifiedImageError, OSError) as e:
        raise FormatError(f"{path}: not a readable image ({e})") from None
    if img.mode not in _DEPTH_MODES:
        raise FormatError(
            f"{path}: unsupported image mode {img.mode!r}; "
            f"need a single-channel 16-bit image"
        )
    raw = np.asarray(img)
    if raw.ndim != 2:
        raise FormatError(f"{path}: expected a single channel, got shape {raw.shape}")
    if raw.min() < 0 or raw.max() > 0xFFFF:
        raise FormatError(f"{path}: values exceed the 16-bit range")
    return DepthMap(values=raw.astype(np.float64) / DEPTH_SCALE)


def write_depth_map(path, values) -> None:
    """Encode metres as a 16-bit PNG (raw = round(metres * 256))."""
    raw = np.round(np.asarray(values, dtype=np.float64) * DEPTH_SCALE)
    if raw.min() < 0 or raw.max() > 0xFFFF:
        raise ValueError("depth values do not fit the 16-bit raw range")
    Image.fromarray(raw.astype(np.uint16)).save(path)


def crop_roi(depth: DepthMap, bbox) -> DepthPatch:
    """Crop an axis-aligned RoI from a depth map, keeping absolute origins.

    Fractional boxes are rounded outward ([left, right) x [top, bottom)
    half-open after rounding) and clipped to the image; depth values are
    copied exactly, never resampled.
    """
    left, top, right, bottom = bbox
    u0 = max(int(math.floor(left)), 0)
    v0 = max(int(math.floor(top)), 0)
    u1 = min(int(math.ceil(right)), depth.width)
    v1 = min(int(math.ceil(bottom)), depth.height)
    if u1 <= u0 or v1 <= v0:
        raise EmptyRoiError(f"bbox {bbox} does not intersect the "
                            f"{depth.width}x{depth.height} image")
    return DepthPatch(values=depth.values[v0:v1, u0:u1].copy(),
                      origin_u=u0, origin_v=v0)


# --- domain-type conversion --------------------------------------------------

def record_to_box(rec: LabelRecord) -> Box3D:
    """Box3D view of a record. 'DontCare' rows carry -1 extents; those are
    clamped to a point-like box so they parse, overlap nothing, and stay
    in the ignored bucket."""
    h, w, l = (max(v, 1e-9) for v in rec.dimensions)
    x, y, z = rec.location
    return Box3D(x=x, y=y, z=z, h=h, w=w, l=l, theta=rec.rotation_y)


def record_to_gt(rec: LabelRecord) -> GtObject:
    """Ground-truth view of a record. Truncation is clamped into [0, 1] and
    out-of-range occlusion values force the ignored bucket."""
    occlusion = rec.occluded if 0 <= rec.occluded <= 3 else 3
    return GtObject(
        label=rec.type,
        box3d=record_to_box(rec),
        bbox2d=rec.bbox,
        truncation=min(max(rec.truncated, 0.0), 1.0),
        occlusion=occlusion,
    )


def record_to_detection(rec: LabelRecord) -> Detection:
    if rec.score is None:
        raise ValueError(f"record for {rec.type!r} has no score")
    return Detection(label=rec.type, box3d=record_to_box(rec), score=rec.score)


def load_label_dir(path) -> dict:
    """Read every *.txt label file in a directory, keyed by filename stem."""
    out = {}
    for file in sorted(Path(path).glob("*.txt")):
        try:
            out[file.stem] = parse_label_file(file.read_text())
        except ParseError as e:
            raise ParseError(f"{file}: {e}") from None
    return out


def load_intrinsics(path, key: str = "P2"):
    """Parse a calibration file and extract the intrinsics under one key."""
    from .camera import intrinsics_from_projection_matrix

    matrices = parse_calib_file(Path(path).read_text())
    if key not in matrices:
        raise ParseError(f"{path}: calibration key {key!r} not present "
                         f"(found {sorted(matrices)})")
    return intrinsics_from_projection_matrix(matrices[key])
