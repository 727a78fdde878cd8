"""multi-level closed-form stylization over an encoder/decoder stack"""

from .stylizer import (
    LEVEL_ORDER,
    StylizerStack,
    batch_stylize,
    build_stylizer_stack,
    encoded_covariance,
    stylize,
    stylize_single_level,
)

__all__ = [
    "LEVEL_ORDER",
    "StylizerStack",
    "batch_stylize",
    "build_stylizer_stack",
    "encoded_covariance",
    "stylize",
    "stylize_single_level",
]
