"""class activation maps, verification tables, relation reports and the sample-size sweep"""

from .cam import CamMap, cam_overlay, compute_cam, normalize_map, upsample_nearest
from .sweep import SWEEP_COLUMNS, sample_size_sweep, wgan_trainer
from .verification import (
    VerificationRow,
    VerificationTable,
    class_group,
    predict_proba,
    relation_frame,
    relation_report,
    verify_images,
)

__all__ = [
    "CamMap",
    "SWEEP_COLUMNS",
    "VerificationRow",
    "VerificationTable",
    "cam_overlay",
    "class_group",
    "compute_cam",
    "normalize_map",
    "predict_proba",
    "relation_frame",
    "relation_report",
    "sample_size_sweep",
    "upsample_nearest",
    "verify_images",
    "wgan_trainer",
]
