"""stratified train/val/test assignment"""

import logging
import math
import numpy as np
from ..shared.constants import DEFAULT_SPLIT_RATIOS, SPLITS
from ..shared.errors import ConfigurationError

logger = logging.getLogger(__name__)

MIN_PER_CLASS = 3


def split_counts(n_items, ratios):
    """train and val take round-half-up shares, test takes the remainder"""
    n_train = min(n_items, math.floor(n_items * ratios[0] + 0.5))
    n_val = min(n_items - n_train, math.floor(n_items * ratios[1] + 0.5))
    return n_train, n_val, n_items - n_train - n_val


def _assign(n_items, ratios, rng):
    n_train, n_val, _ = split_counts(n_items, ratios)
    labels = np.array([SPLITS[0]] * n_train + [SPLITS[1]] * n_val + [SPLITS[2]] * (n_items - n_train - n_val), dtype=object)
    return labels[rng.permutation(n_items)]


def split_dataset(manifest, ratios=DEFAULT_SPLIT_RATIOS, seed=0):
    """per-class stratified shuffle into train/val/test

    Args:
        manifest (DatasetManifest): rows to assign
        ratios (tuple, optional): (train, val, test) fractions summing to 1. Defaults to (0.7, 0.1, 0.2).
        seed (int, optional): shuffle seed. Defaults to 0.

    Raises:
        ConfigurationError: ratios negative or not summing to 1 within 1e-9

    Returns:
        DatasetManifest: a copy with the split column filled and the seed recorded
    """
    ratios = tuple(float(ratio) for ratio in ratios)
    if len(ratios) != 3 or min(ratios) < 0 or abs(sum(ratios) - 1.0) > 1e-9:
        raise ConfigurationError(f"split ratios must be three non-negative values summing to 1, got {ratios}")

    manifest.label_indices()
    df = manifest.df.copy()
    sizes = df.groupby("label").size()
    small = sizes[sizes < MIN_PER_CLASS]
    if len(small):
        logger.warning(
            "classes %s have fewer than %s items; falling back to a global split",
            small.to_dict(),
            MIN_PER_CLASS,
        )
        df["split"] = _assign(len(df), ratios, np.random.default_rng([seed, len(manifest.classes)]))
    else:
        for label, group in df.groupby("label"):
            rng = np.random.default_rng([seed, manifest.classes.index(label)])
            df.loc[group.index, "split"] = _assign(len(group), ratios, rng)

    logger.info("split %s items: %s", len(df), df["split"].value_counts().to_dict())
    split = manifest.copy(df)
    split.seed = seed
    return split
