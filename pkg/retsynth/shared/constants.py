"""contains shared constants used across multiple packages"""

from pathlib import Path

HAND_DIR = Path(__file__).resolve().parent.parent / "hand"

# class vocabulary of the synthetic corpus, in class-index order
CLASSES = ["drusen", "ga", "healthy"]

# display names used for class groups in verification tables, e.g. "Drusen-CFP"
CLASS_DISPLAY = {
    "drusen": "Drusen",
    "ga": "GA",
    "healthy": "Healthy",
}

MODALITIES = ["CFP", "FA"]

# CFP is colour, FA gray-scale
MODALITY_CHANNELS = {"CFP": 3, "FA": 1}

PROVENANCES = ["real", "wgan", "dcgan", "styletransfer"]

SPLITS = ["train", "val", "test"]

DEFAULT_SPLIT_RATIOS = (0.7, 0.1, 0.2)

MANIFEST_COLUMNS = ["image_id", "path", "label", "modality", "split", "provenance"]

MANIFEST_FILENAME = "manifest.csv"

# generator resolutions; the 64x64 cap is a hard limit of the DCGAN stack
GENERATOR_SIZES = (32, 64)

# discriminator/critic/classifier also accept small inputs for gradient checks
DISCRIMINATOR_SIZES = (8, 16, 32, 64)

MAX_IMAGE_DIM = 1024

# probability clamp applied before logs
PROB_CLAMP = 1e-7

CHECKPOINT_MAGIC = b"SYNR"
CHECKPOINT_VERSION = 1
