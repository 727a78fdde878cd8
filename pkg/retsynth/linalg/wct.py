"""
Symmetric eigendecomposition and the whitening-coloring transform.

Whitening removes the covariance structure of content features,
f_w = cov(f)^(-1/2) (f - mean); coloring imposes the covariance and mean of
style features, cov(s)^(1/2) f_w + mean(s). Both matrix powers come from a
cyclic Jacobi eigensolver run in float64.
"""

from dataclasses import dataclass
import logging
import math
import numpy as np
from ..shared.errors import (
    ConfigurationError,
    ContractError,
    DegenerateInputError,
    DimensionError,
    NumericError,
)

logger = logging.getLogger(__name__)

DEFAULT_EPS_REG = 1e-5
DEFAULT_EIG_FLOOR = 1e-8
MAX_SWEEPS = 100
CONVERGENCE_TOL = 1e-10
SYMMETRY_TOL = 1e-8


@dataclass
class FeatureMatrix:
    """C x N feature values (N = H * W) with the channel mean once centered"""

    values: np.ndarray
    mean: np.ndarray = None
    spatial: tuple = None

    def __post_init__(self):
        self.values = np.asarray(self.values)
        if self.values.ndim != 2:
            raise DimensionError(f"feature matrix must be C x N, got shape {self.values.shape}")

    @property
    def channels(self):
        return self.values.shape[0]

    @property
    def samples(self):
        return self.values.shape[1]

    @classmethod
    def from_feature_map(cls, feature_map):
        """flattens a C x H x W (or 1 x C x H x W) feature map"""
        feature_map = np.asarray(feature_map)
        if feature_map.ndim == 4:
            if feature_map.shape[0] != 1:
                raise DimensionError(f"expected a single feature map, got batch {feature_map.shape}")
            feature_map = feature_map[0]
        if feature_map.ndim != 3:
            raise DimensionError(f"feature map must be C x H x W, got shape {feature_map.shape}")
        channels, height, width = feature_map.shape
        return cls(values=feature_map.reshape(channels, height * width), spatial=(height, width))

    def to_feature_map(self):
        """C x H x W view of the values"""
        if self.spatial is None:
            raise ContractError("feature matrix has no spatial shape to restore")
        return self.values.reshape(self.channels, *self.spatial)

    def copy(self):
        return FeatureMatrix(
            values=self.values.copy(),
            mean=None if self.mean is None else self.mean.copy(),
            spatial=self.spatial,
        )


@dataclass
class EigDecomp:
    """eigenvalues in descending order and the matching orthonormal eigenvector columns"""

    eigvals: np.ndarray
    eigvecs: np.ndarray

    def reconstruct(self):
        return (self.eigvecs * self.eigvals[None, :]) @ self.eigvecs.T


def covariance(features, eps_reg=DEFAULT_EPS_REG):
    """centers features in place and returns (1/N) f f^T + eps_reg I

    Args:
        features (FeatureMatrix): mutated: values centered, mean recorded
        eps_reg (float, optional): ridge added to the diagonal. Defaults to 1e-5.

    Raises:
        ConfigurationError: eps_reg < 0
        DegenerateInputError: fewer than two samples

    Returns:
        np.ndarray: symmetric C x C matrix
    """
    if eps_reg < 0:
        raise ConfigurationError(f"eps_reg must be >= 0, got {eps_reg}")
    if features.samples < 2:
        raise DegenerateInputError(
            f"covariance needs at least 2 samples, got N={features.samples}"
        )
    values = features.values.astype(np.float64)
    mean = values.mean(axis=1)
    values = values - mean[:, None]
    features.values = values.astype(features.values.dtype, copy=False)
    features.mean = mean

    cov = values @ values.T / features.samples
    cov = 0.5 * (cov + cov.T)
    cov[np.diag_indices_from(cov)] += eps_reg
    return cov


def _round_robin(size):
    """tournament ordering: each round is a set of disjoint (p, q) pairs, each pair once per sweep"""
    players = list(range(size)) + ([-1] if size % 2 else [])
    count = len(players)
    for _ in range(count - 1):
        pairs = [(players[i], players[count - 1 - i]) for i in range(count // 2)]
        yield [(min(p, q), max(p, q)) for p, q in pairs if p >= 0 and q >= 0]
        players = [players[0], players[-1]] + players[1:-1]


def _rotate_round(matrix, vectors, pairs):
    """applies the Jacobi rotations of one round of disjoint pairs at once"""
    p = np.array([pair[0] for pair in pairs])
    q = np.array([pair[1] for pair in pairs])
    apq = matrix[p, q]
    active = apq != 0.0
    if not active.any():
        return matrix, vectors
    p, q, apq = p[active], q[active], apq[active]

    theta = (matrix[q, q] - matrix[p, p]) / (2.0 * apq)
    t = np.where(theta >= 0, 1.0, -1.0) / (np.abs(theta) + np.sqrt(theta * theta + 1.0))
    c = 1.0 / np.sqrt(t * t + 1.0)
    s = t * c

    rotation = np.eye(matrix.shape[0])
    rotation[p, p] = c
    rotation[q, q] = c
    rotation[p, q] = s
    rotation[q, p] = -s
    matrix = rotation.T @ matrix @ rotation
    matrix = 0.5 * (matrix + matrix.T)
    matrix[p, q] = matrix[q, p] = 0.0
    return matrix, vectors @ rotation


def _max_off_diagonal(matrix):
    off = np.abs(matrix - np.diag(np.diag(matrix)))
    return float(off.max()) if off.size else 0.0


def sym_eig(matrix):
    """eigendecomposition of a symmetric matrix by cyclic Jacobi rotations

    Each sweep visits every off-diagonal pair once in round-robin order;
    the disjoint pairs of a round are rotated together.

    Sweeps until the largest off-diagonal entry is below 1e-10 * ||A||_F or
    100 sweeps ran. Eigenpairs are sorted descending and each eigenvector's
    first nonzero component is made positive.

    Raises:
        ContractError: if the matrix is not square and symmetric within 1e-8
        NumericError: if 100 sweeps do not converge

    Returns:
        EigDecomp: the decomposition
    """
    matrix = np.array(matrix, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ContractError(f"sym_eig needs a square matrix, got shape {matrix.shape}")
    asymmetry = float(np.abs(matrix - matrix.T).max()) if matrix.size else 0.0
    if asymmetry >= SYMMETRY_TOL:
        raise ContractError(f"sym_eig needs a symmetric matrix, max |A - A^T| = {asymmetry}")

    size = matrix.shape[0]
    vectors = np.eye(size)
    tolerance = CONVERGENCE_TOL * float(np.linalg.norm(matrix))

    sweeps = 0
    while _max_off_diagonal(matrix) > tolerance:
        if sweeps == MAX_SWEEPS:
            raise NumericError(
                f"sym_eig did not converge in {MAX_SWEEPS} sweeps, "
                f"residual off-diagonal {_max_off_diagonal(matrix)}"
            )
        for pairs in _round_robin(size):
            matrix, vectors = _rotate_round(matrix, vectors, pairs)
        sweeps += 1
    logger.debug("sym_eig: %s x %s converged in %s sweeps", size, size, sweeps)

    eigvals = np.diag(matrix).copy()
    order = np.argsort(-eigvals, kind="stable")
    eigvals, vectors = eigvals[order], vectors[:, order]

    for col in range(size):
        nonzero = np.flatnonzero(np.abs(vectors[:, col]) > 1e-12)
        if nonzero.size and vectors[nonzero[0], col] < 0:
            vectors[:, col] = -vectors[:, col]

    return EigDecomp(eigvals=eigvals, eigvecs=vectors)


def mat_power_sym(matrix, power, eig_floor=DEFAULT_EIG_FLOOR):
    """V diag(max(lambda, eig_floor)^power) V^T for symmetric matrix"""
    if eig_floor <= 0:
        raise ConfigurationError(f"eig_floor must be positive, got {eig_floor}")
    decomp = sym_eig(matrix)
    scaled = np.maximum(decomp.eigvals, eig_floor) ** power
    return (decomp.eigvecs * scaled[None, :]) @ decomp.eigvecs.T


def whiten(features, eps_reg=DEFAULT_EPS_REG, eig_floor=DEFAULT_EIG_FLOOR):
    """cov(f)^(-1/2) (f - mean); the input is left untouched

    Returns:
        FeatureMatrix: whitened features with mean zero
    """
    centered = features.copy()
    cov = covariance(centered, eps_reg)
    whitening = mat_power_sym(cov, -0.5, eig_floor)
    values = whitening @ centered.values.astype(np.float64)
    return FeatureMatrix(
        values=values.astype(features.values.dtype, copy=False),
        mean=np.zeros(features.channels),
        spatial=features.spatial,
    )


def color(whitened, style, eps_reg=DEFAULT_EPS_REG, eig_floor=DEFAULT_EIG_FLOOR):
    """cov(style)^(1/2) f_w + mean(style); the style features are left untouched

    Raises:
        DimensionError: if channel counts differ
    """
    if whitened.channels != style.channels:
        raise DimensionError(
            f"color: whitened features have {whitened.channels} channels, "
            f"style features {style.channels}"
        )
    centered_style = style.copy()
    cov = covariance(centered_style, eps_reg)
    coloring = mat_power_sym(cov, 0.5, eig_floor)
    values = coloring @ whitened.values.astype(np.float64) + centered_style.mean[:, None]
    return FeatureMatrix(
        values=values.astype(whitened.values.dtype, copy=False),
        mean=centered_style.mean.copy(),
        spatial=whitened.spatial,
    )


def wct(content, style, alpha=1.0, eps_reg=DEFAULT_EPS_REG, eig_floor=DEFAULT_EIG_FLOOR):
    """alpha * color(whiten(content), style) + (1 - alpha) * content

    Raises:
        ConfigurationError: alpha outside [0, 1]
    """
    if not 0.0 <= alpha <= 1.0:
        raise ConfigurationError(f"alpha must be in [0, 1], got {alpha}")
    colored = color(whiten(content, eps_reg, eig_floor), style, eps_reg, eig_floor)
    values = alpha * colored.values + (1.0 - alpha) * content.values
    return FeatureMatrix(
        values=values.astype(content.values.dtype, copy=False), spatial=content.spatial
    )


def covariance_of(values):
    """(1/N) centered covariance of a C x N array without regularization"""
    return covariance(FeatureMatrix(values=np.array(values, dtype=np.float64)), 0.0)


def whitening_residual(whitened):
    """max-norm distance of the unregularized covariance of f_w from the identity"""
    cov = covariance_of(whitened.values)
    return float(np.abs(cov - np.eye(whitened.channels)).max())
