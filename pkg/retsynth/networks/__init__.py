"""layers, networks and the builders for every architecture of the pipeline"""

from .builders import (
    BUILDERS,
    ENCODER_WIDTHS,
    build_classifier,
    build_dcgan_generator,
    build_decoder,
    build_discriminator,
    build_encoder,
    build_mlp,
    build_network,
)
from .layers import Activation, BatchNorm2d, Conv2d, ConvTranspose2d, Layer, Linear, Pool, Reshape, Tap
from .network import Network
from .sampler import LatentSampler

__all__ = [
    "Activation",
    "BUILDERS",
    "BatchNorm2d",
    "Conv2d",
    "ConvTranspose2d",
    "ENCODER_WIDTHS",
    "LatentSampler",
    "Layer",
    "Linear",
    "Network",
    "Pool",
    "Reshape",
    "Tap",
    "build_classifier",
    "build_dcgan_generator",
    "build_decoder",
    "build_discriminator",
    "build_encoder",
    "build_mlp",
    "build_network",
]
