"""dense tensors with reverse-mode automatic differentiation"""

from .tensor import Function, Graph, Tensor, get_default_dtype, is_grad_enabled, no_grad, precision
from .functional import (
    RunningStats,
    activation,
    batchnorm2d,
    conv2d,
    conv_transpose2d,
    linear,
    losses,
    pool_and_resize,
    softmax,
)
from .gradcheck import grad_check

__all__ = [
    "Function",
    "Graph",
    "RunningStats",
    "Tensor",
    "activation",
    "batchnorm2d",
    "conv2d",
    "conv_transpose2d",
    "get_default_dtype",
    "grad_check",
    "is_grad_enabled",
    "linear",
    "losses",
    "no_grad",
    "pool_and_resize",
    "precision",
    "softmax",
]
