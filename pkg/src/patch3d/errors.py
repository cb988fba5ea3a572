"""Exception types raised by the patch3d library."""


class InvalidDepthError(ValueError):
    """A depth value is zero or negative where a valid depth is required."""


class BehindCameraError(ValueError):
    """A 3D point with z <= 0 cannot be projected onto the image plane."""


class MalformedCalibrationError(ValueError):
    """A projection matrix is malformed (wrong shape or non-positive focal)."""


class EmptyInputError(ValueError):
    """An operation received an empty patch or point set."""


class EmptyForegroundError(ValueError):
    """A foreground mask selects no pixels; pooling over it is undefined."""


class ShapeError(ValueError):
    """Array dimensions do not match the operation's contract."""


class ParseError(ValueError):
    """A text file does not follow the expected format."""


class FormatError(ValueError):
    """A binary file (e.g. a depth image) has an unsupported encoding."""


class EmptyRoiError(ValueError):
    """A region of interest does not intersect the image."""


class AlignmentError(ValueError):
    """Prediction and ground-truth frame sets do not match."""
