"""command base class and the helpers commands share"""

import argparse
import logging
from pathlib import Path
import numpy as np
from ..extract.codec import load_image
from ..shared.constants import MANIFEST_FILENAME
from ..shared.errors import ConfigurationError, DimensionError, UsageError
from ..shared.standardize import standardize_label, standardize_modality
from ..transform.manifest import DatasetManifest

logger = logging.getLogger(__name__)

IMAGE_SUFFIXES = (".ppm", ".pgm")


class CommandParser(argparse.ArgumentParser):
    """argument parser that raises UsageError instead of exiting"""

    def error(self, message):
        raise UsageError(f"{self.prog}: {message}\n{self.format_usage()}")


class BaseCommand:
    """one pipeline step; subclasses set `help`, add arguments and implement handle"""

    help = ""

    def create_parser(self, prog):
        parser = CommandParser(prog=prog, description=self.help)
        parser.add_argument("--config", type=Path, default=None, help="INI or yaml file overriding hand/defaults.yaml")
        parser.add_argument("--seed", type=int, default=0, help="seed for every random draw of the run")
        parser.add_argument("--out", type=Path, default=Path("output"), help="directory for outputs and logs")
        self.add_arguments(parser)
        return parser

    def add_arguments(self, parser):
        """adds command-specific arguments"""

    def handle(self, options, config):
        raise NotImplementedError("subclasses of BaseCommand must provide a handle() method")


def option_or_config(value, config, key, getter="get_int"):
    """the command-line value when given, the config value otherwise"""
    return value if value is not None else getattr(config, getter)(key)


def modality_for(images):
    """CFP for 3-channel arrays, FA for 1-channel"""
    channels = images.shape[1]
    if channels not in (1, 3):
        raise DimensionError(f"images must have 1 or 3 channels, got {channels}")
    return "CFP" if channels == 3 else "FA"


def image_files(directory):
    return sorted(path for path in Path(directory).iterdir() if path.suffix in IMAGE_SUFFIXES)


def read_manifest(path):
    """a manifest csv, or the manifest.csv inside a directory"""
    path = Path(path)
    if path.is_dir():
        path = path / MANIFEST_FILENAME
    if not path.exists():
        raise ConfigurationError(f"no manifest at {path}")
    return DatasetManifest.from_csv(path)


def read_images(source, split=None, label=None, modality=None):
    """images from a manifest csv, a directory holding manifest.csv, or a bare directory of images

    Args:
        source (str | Path): where the images are
        split (str, optional): keep one split (manifests only)
        label (str, optional): keep one class (manifests only)
        modality (str, optional): keep one modality (manifests only)

    Raises:
        ConfigurationError: nothing to read

    Returns:
        tuple[np.ndarray, list[Path]]: N x C x H x W images and their files
    """
    source = Path(source)
    if source.suffix == ".csv" or (source.is_dir() and (source / MANIFEST_FILENAME).exists()):
        manifest = read_manifest(source)
        filters = {}
        if label is not None:
            filters["label"] = standardize_label(label, manifest.classes)
        if modality is not None:
            filters["modality"] = standardize_modality(modality)
        if split is not None:
            filters["split"] = split
        selected = manifest.subset(**filters)
        images, _ = selected.load_arrays()
        paths = selected.paths()
    elif source.is_dir():
        paths = image_files(source)
        images = np.stack([load_image(path) for path in paths]) if paths else np.empty((0,))
    else:
        raise ConfigurationError(f"{source} is neither a manifest nor a directory")

    if len(paths) == 0:
        raise ConfigurationError(f"no images found in {source} for {split=}, {label=}, {modality=}")
    logger.info("read %s images from %s", len(paths), source)
    return images, paths
