"""contains utility functions used across two or more retsynth modules"""

import hashlib
import logging
import math
from pathlib import Path
import numpy as np
import yaml

logger = logging.getLogger(__name__)


def guess_n_loops(n_items, batch_size):
    """calculates the number of iterations needed to process n_items in batches

    Args:
        n_items (int): number of items
        batch_size (int): number of items per iteration

    Returns:
        int: number of iterations needed
    """
    if batch_size < 1:
        raise ValueError(f"batch_size must be positive, got {batch_size}")
    return math.ceil(n_items / batch_size)


def load_yaml(yaml_filename):
    """reads a yaml file that must hold a mapping

    Args:
        yaml_filename (str | Path): path to the yaml file

    Raises:
        ValueError: if the yaml file isn't read as a dictionary

    Returns:
        dict: parsed mapping
    """
    with open(yaml_filename, "r", encoding="UTF-8") as yaml_file:
        values = yaml.safe_load(yaml_file)
    if not isinstance(values, dict):
        raise ValueError(
            f"malformed yaml file '{yaml_filename}'. must be a dictionary, got {type(values)}"
        )
    return values


def replace_vals_from_yaml(df, yaml_filename):
    """replaces the values of a column in df with the values named in a yaml file

    Args:
        df (pandas.DataFrame): dataframe to replace
        yaml_filename (str | Path):
            path to yaml file containing values and their replacements.
            the file stem must be the name of a column in df

    Raises:
        ValueError: if the file stem is not a column in the dataframe

    Returns:
        pandas.DataFrame: dataframe with values replaced
    """
    colname = Path(yaml_filename).stem
    if colname not in df.columns:
        raise ValueError(
            f"the name of file '{yaml_filename}' must be the name of a column in the data. "
            f"Columns are: {', '.join(df.columns.tolist())}"
        )

    replace_vals = load_yaml(yaml_filename)
    df = df.replace({colname: replace_vals})
    return df


def file_sha1(path):
    """sha1 hex digest of a file's bytes"""
    digest = hashlib.sha1()
    with open(path, "rb") as file:
        for block in iter(lambda: file.read(1 << 16), b""):
            digest.update(block)
    return digest.hexdigest()


def psnr(image, reference):
    """peak signal-to-noise ratio in dB between two images in [-1, 1]

    The [-1, 1] range has peak-to-peak 2, so this equals the usual PSNR of the
    same images mapped to [0, 1].
    """
    image = np.asarray(image, dtype=np.float64)
    reference = np.asarray(reference, dtype=np.float64)
    if image.shape != reference.shape:
        raise ValueError(f"shape mismatch: {image.shape} vs {reference.shape}")
    mse = float(np.mean((image - reference) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(4.0 / mse)


def ensure_dir(path):
    """creates a directory (and parents) if needed and returns it as a Path"""
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    return path
