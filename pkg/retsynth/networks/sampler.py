"""standard normal latent samples for the generators"""

from dataclasses import dataclass, field
import numpy as np
from ..autodiff import Tensor
from ..shared.errors import ConfigurationError


@dataclass
class LatentSampler:
    """draws N x dim standard normal batches from a seeded stream"""

    dim: int = 100
    seed: int = 0
    rng: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        if self.dim < 1:
            raise ConfigurationError(f"latent dim must be >= 1, got {self.dim}")
        self.rng = np.random.default_rng(self.seed)

    def sample(self, n):
        if n < 1:
            raise ConfigurationError(f"cannot sample {n} latent vectors")
        return Tensor(self.rng.standard_normal((n, self.dim)))

    def reset(self):
        self.rng = np.random.default_rng(self.seed)
