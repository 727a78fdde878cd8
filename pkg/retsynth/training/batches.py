"""seeded batch order over an in-memory image array"""

import numpy as np
from ..shared.errors import ConfigurationError


class BatchStream:
    """yields batches from a fresh seeded permutation each pass; the last short batch is dropped"""

    def __init__(self, images, batch_size, seed):
        self.images = np.asarray(images)
        if len(self.images) < 2:
            raise ConfigurationError(f"need at least 2 images to train, got {len(self.images)}")
        self.batch_size = min(batch_size, len(self.images))
        if self.batch_size < 2:
            raise ConfigurationError(f"batch_size must be >= 2, got {batch_size}")
        self.rng = np.random.default_rng(seed)
        self.order = np.empty(0, dtype=int)
        self.cursor = 0
        self.passes = 0

    def __call__(self):
        if self.cursor + self.batch_size > len(self.order):
            self.order = self.rng.permutation(len(self.images))
            self.cursor = 0
            self.passes += 1
        batch = self.order[self.cursor : self.cursor + self.batch_size]
        self.cursor += self.batch_size
        return self.images[batch]
