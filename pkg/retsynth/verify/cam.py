"""class activation maps from the final conv features and the linear head weights"""

from dataclasses import dataclass
import logging
import numpy as np
from ..autodiff import Tensor, no_grad
from ..shared.errors import DimensionError, LabelError

logger = logging.getLogger(__name__)

OVERLAY_STRENGTH = 0.6


@dataclass
class CamMap:
    """H x W relevance in [0, 1] for one class of one image"""

    values: np.ndarray
    class_idx: int
    source_id: str = ""

    @property
    def argmax(self):
        """(row, col) of the first maximum"""
        return tuple(int(i) for i in np.unravel_index(np.argmax(self.values), self.values.shape))

    def quadrant(self):
        """quadrant name holding the argmax"""
        row, col = self.argmax
        height, width = self.values.shape
        vertical = "top" if row < height // 2 else "bottom"
        horizontal = "left" if col < width // 2 else "right"
        return f"{vertical}-{horizontal}"

    def to_image(self):
        """1 x H x W gray-scale image in [-1, 1]"""
        return (2.0 * self.values - 1.0)[None].astype(np.float32)


def normalize_map(raw):
    """min-max to [0, 1]; a constant map becomes all zeros"""
    raw = np.asarray(raw, dtype=np.float64)
    low, high = raw.min(), raw.max()
    if high - low <= 0.0:
        return np.zeros_like(raw)
    return (raw - low) / (high - low)


def upsample_nearest(values, height, width):
    rows = (np.arange(height) * values.shape[0]) // height
    cols = (np.arange(width) * values.shape[1]) // width
    return values[rows][:, cols]


def compute_cam(classifier, image, class_idx, source_id=""):
    """sum_k w[class, k] * f_k over the "final_conv" tap, normalized and upsampled

    Args:
        classifier (Network): built by build_classifier
        image (np.ndarray): C x H x W in [-1, 1]
        class_idx (int): class whose map to compute
        source_id (str, optional): id of the image, kept on the map

    Raises:
        ContractError: if the network is not CAM-compatible
        LabelError: class index out of range

    Returns:
        CamMap: values of the image's H x W
    """
    head = classifier.cam_head()
    if not 0 <= class_idx < head.out_features:
        raise LabelError(f"class index {class_idx} out of range for {head.out_features} classes")
    image = np.asarray(image, dtype=np.float32)
    if image.ndim != 3:
        raise DimensionError(f"image must be C x H x W, got shape {image.shape}")

    previous = classifier.mode
    classifier.eval()
    try:
        with no_grad():
            _, taps = classifier.forward(Tensor(image[None]), want_taps=["final_conv"])
    finally:
        classifier.mode = previous

    features = taps["final_conv"].numpy()[0].astype(np.float64)
    weights = head.params["weight"].data[class_idx].astype(np.float64)
    raw = np.tensordot(weights, features, axes=1)
    values = upsample_nearest(normalize_map(raw), image.shape[1], image.shape[2])
    return CamMap(values=values, class_idx=int(class_idx), source_id=source_id)


def cam_overlay(image, cam):
    """3 x H x W composite in [-1, 1]: the image with its red channel boosted by the map"""
    image = np.asarray(image, dtype=np.float64)
    if image.shape[1:] != cam.values.shape:
        raise DimensionError(f"image {image.shape[1:]} and map {cam.values.shape} differ")
    unit = (image + 1.0) / 2.0
    if unit.shape[0] == 1:
        unit = np.repeat(unit, 3, axis=0)
    unit[0] = np.clip(unit[0] + OVERLAY_STRENGTH * cam.values, 0.0, 1.0)
    return (2.0 * unit - 1.0).astype(np.float32)
