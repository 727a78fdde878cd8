"""trains a DCGAN generator against a sigmoid discriminator"""

import logging
from ...load.checkpoint import save_checkpoint
from ...networks import build_dcgan_generator, build_discriminator
from ...training import GanConfig, train_gan
from ..base import BaseCommand, read_images

logger = logging.getLogger(__name__)


def adversarial_images(options):
    images, _ = read_images(options.images, split=options.split, label=options.label, modality=options.modality)
    return images


def add_adversarial_arguments(parser):
    parser.add_argument("--images", required=True, help="manifest, manifest directory or image directory")
    parser.add_argument("--label", default=None, help="train on one class of a manifest")
    parser.add_argument("--modality", default=None, help="train on one modality of a manifest")
    parser.add_argument("--split", default=None, help="train on one split of a manifest")
    parser.add_argument("--steps", type=int, default=None)


def gan_config(config, seed, steps=None, n_images=None):
    """GanConfig from the gan section; the batch never exceeds the image count"""
    batch_size = config.get_int("gan.batch_size")
    return GanConfig(
        batch_size=batch_size if n_images is None else min(batch_size, n_images),
        latent_dim=config.get_int("gan.latent_dim"),
        lr_g=config.get_float("gan.lr_g"),
        lr_d=config.get_float("gan.lr_d"),
        optimizer=config.get_str("gan.optimizer"),
        b1=config.get_float("gan.b1"),
        steps=steps if steps is not None else config.get_int("gan.steps"),
        seed=seed,
        saturating=config.get_bool("gan.saturating"),
    )


class Command(BaseCommand):
    help = "train a DCGAN on real images and save generator + discriminator"

    def add_arguments(self, parser):
        add_adversarial_arguments(parser)

    def handle(self, options, config):
        images = adversarial_images(options)
        cfg = gan_config(config, options.seed, options.steps, len(images))
        base_ch = config.get_int("gan.base_ch")

        img_channels, img_size = images.shape[1], images.shape[2]
        generator = build_dcgan_generator(cfg.latent_dim, img_size, img_channels, base_ch, seed=options.seed)
        discriminator = build_discriminator(img_size, img_channels, base_ch, head="sigmoid", seed=options.seed + 1)
        report = train_gan(generator, discriminator, images, cfg)

        save_checkpoint(
            {"generator": generator, "discriminator": discriminator},
            {"step": cfg.steps, "seed": options.seed},
            options.out / "gan.bin",
        )
        report.to_frame().to_csv(options.out / "train_gan.csv", index=False)
