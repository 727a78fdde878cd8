"""samples a trained generator into image files and a manifest"""

import logging
import numpy as np
import pandas as pd
from ...extract.codec import image_suffix, save_image
from ...load.checkpoint import load_checkpoint
from ...networks import LatentSampler
from ...shared.assign_unique_ids import assign_unique_ids
from ...shared.constants import MANIFEST_FILENAME
from ...shared.errors import ConfigurationError
from ...shared.standardize import standardize_label
from ...transform.manifest import DatasetManifest
from ..base import BaseCommand, modality_for

logger = logging.getLogger(__name__)


def provenance_of(networks):
    """wgan when the checkpoint holds a critic, dcgan otherwise"""
    return "wgan" if "critic" in networks else "dcgan"


class Command(BaseCommand):
    help = "draw --n images from the generator of a gan or wgan checkpoint"

    def add_arguments(self, parser):
        parser.add_argument("--ckpt", required=True, help="checkpoint written by train-gan or train-wgan")
        parser.add_argument("--n", type=int, required=True, help="images to generate")
        parser.add_argument("--label", default="drusen", help="class the generator was trained on")

    def handle(self, options, config):
        if options.n < 1:
            raise ConfigurationError(f"--n must be >= 1, got {options.n}")
        networks, _ = load_checkpoint(options.ckpt, expected_kinds={"generator": "dcgan_generator"})
        generator = networks["generator"]
        label = standardize_label(options.label)
        provenance = provenance_of(networks)

        sampler = LatentSampler(dim=generator.spec["latent_dim"], seed=options.seed)
        images = np.clip(generator.predict(sampler.sample(options.n).numpy()), -1.0, 1.0)
        modality = modality_for(images)
        suffix = image_suffix(images.shape[1])

        rows = []
        for index, image in enumerate(images):
            name = f"images/{provenance}_{label}_{modality}_{options.seed}_{index:05d}{suffix}"
            save_image(image, options.out / name)
            rows.append({"path": name, "label": label, "modality": modality, "split": "", "provenance": provenance})
        df = assign_unique_ids(pd.DataFrame(rows), "path", "label", "modality", "provenance")
        DatasetManifest(df, root=options.out).to_csv(options.out / MANIFEST_FILENAME)
        logger.info("generated %s %s images with %s", options.n, label, options.ckpt)
