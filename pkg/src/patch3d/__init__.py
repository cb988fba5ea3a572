"""patch3d: depth-patch geometry and oriented-box evaluation toolkit.

Converts depth-map crops into both an image-grid channel tensor and a
flattened point set, demonstrates numerically that a 1x1-convolution +
global-max-pool network reads the two identically, and provides the
oriented-box IoU, regression-loss and interpolated-AP machinery needed
to evaluate 3D detections in the KITTI data regime.
"""

from .boxes import (
    Box3D,
    DetectionLoss,
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
from .camera import (
    CameraIntrinsics,
    backproject,
    intrinsics_from_projection_matrix,
    project,
)
from .evaluation import (
    ApResult,
    Detection,
    Difficulty,
    GtObject,
    MatchResult,
    PrCurve,
    ap_11,
    ap_40,
    assign_difficulty,
    evaluate,
    match_detections,
    precision_recall,
    route_by_distance,
)
from .kitti import (
    DepthMap,
    LabelRecord,
    crop_roi,
    load_intrinsics,
    load_label_dir,
    parse_calib_file,
    parse_label_file,
    read_depth_map,
    record_to_detection,
    record_to_gt,
    write_depth_map,
    write_predictions,
)
from .patches import (
    ChannelConfig,
    DepthPatch,
    PatchTensor,
    build_patch_tensor,
    dump_patch_tensor,
    dump_pointset,
    make_foreground_mask,
    parse_patch_tensor,
    parse_pointset,
    patch_to_pointset,
    resample_patch,
)
from .setfunc import (
    MlpLayer,
    MlpParams,
    apply_mlp,
    dump_mlp,
    equivalence_trials,
    grid_function,
    identity_mlp,
    mask_global_pool,
    parse_mlp,
    random_mlp,
    set_function,
)

__version__ = "0.1.0"

__all__ = [
    "ApResult", "Box3D", "CameraIntrinsics", "ChannelConfig", "DepthMap",
    "DepthPatch", "Detection", "DetectionLoss", "Difficulty", "GtObject",
    "LabelRecord", "MatchResult", "MlpLayer", "MlpParams", "PatchTensor",
    "PrCurve",
    "ap_11", "ap_40", "apply_mlp", "assign_difficulty", "backproject",
    "bev_polygon", "build_patch_tensor", "corner_loss", "corners", "crop_roi",
    "detection_loss", "dump_mlp", "dump_patch_tensor", "dump_pointset",
    "equivalence_trials", "evaluate", "grid_function", "identity_mlp",
    "intrinsics_from_projection_matrix", "iou_3d", "iou_bev",
    "load_intrinsics", "load_label_dir", "make_foreground_mask",
    "mask_global_pool", "match_detections", "monte_carlo_iou_bev",
    "parse_calib_file", "parse_label_file", "parse_mlp", "parse_patch_tensor",
    "parse_pointset", "patch_to_pointset", "polygon_area",
    "polygon_intersection", "precision_recall", "project", "random_mlp",
    "read_depth_map", "record_to_detection", "record_to_gt", "resample_patch",
    "route_by_distance", "set_function", "smooth_l1", "wrap_angle",
    "write_depth_map", "write_predictions",
]
