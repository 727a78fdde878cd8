"""symmetric eigendecomposition and the whitening-coloring transform"""

from .wct import (
    DEFAULT_EIG_FLOOR,
    DEFAULT_EPS_REG,
    EigDecomp,
    FeatureMatrix,
    color,
    covariance,
    covariance_of,
    mat_power_sym,
    sym_eig,
    whiten,
    whitening_residual,
    wct,
)

__all__ = [
    "DEFAULT_EIG_FLOOR",
    "DEFAULT_EPS_REG",
    "EigDecomp",
    "FeatureMatrix",
    "color",
    "covariance",
    "covariance_of",
    "mat_power_sym",
    "sym_eig",
    "whiten",
    "whitening_residual",
    "wct",
]
