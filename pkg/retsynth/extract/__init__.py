"""image files in and synthetic retinal images out"""

from .codec import decode_pnm, encode_pnm, image_suffix, load_image, save_image, to_float, to_pixels
from .corpus import QUADRANTS, disk_mask, lesion_mask, quadrant_mask, render_image, synth_corpus

__all__ = [
    "QUADRANTS",
    "decode_pnm",
    "disk_mask",
    "encode_pnm",
    "image_suffix",
    "lesion_mask",
    "load_image",
    "quadrant_mask",
    "render_image",
    "save_image",
    "synth_corpus",
    "to_float",
    "to_pixels",
]
