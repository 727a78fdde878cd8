"""dataset manifests, splits and merging"""

from .manifest import DatasetManifest
from .split import split_counts, split_dataset

__all__ = ["DatasetManifest", "split_counts", "split_dataset"]
