"""trains a DCGAN generator against a weight-clipped Wasserstein critic"""

import logging
from ...load.checkpoint import save_checkpoint
from ...networks import build_dcgan_generator, build_discriminator
from ...training import WganConfig, train_wgan
from ..base import BaseCommand
from .train_gan import add_adversarial_arguments, adversarial_images

logger = logging.getLogger(__name__)


def wgan_config(config, seed, steps=None, n_images=None):
    """WganConfig from the wgan section; the batch never exceeds the image count"""
    batch_size = config.get_int("wgan.batch_size")
    return WganConfig(
        clip_c=config.get_float("wgan.clip_c"),
        n_critic=config.get_int("wgan.n_critic"),
        lr=config.get_float("wgan.lr"),
        optimizer=config.get_str("wgan.optimizer"),
        steps=steps if steps is not None else config.get_int("wgan.steps"),
        seed=seed,
        batch_size=batch_size if n_images is None else min(batch_size, n_images),
        latent_dim=config.get_int("wgan.latent_dim"),
    )


class Command(BaseCommand):
    help = "train a WGAN on real images and save generator + critic"

    def add_arguments(self, parser):
        add_adversarial_arguments(parser)

    def handle(self, options, config):
        images = adversarial_images(options)
        cfg = wgan_config(config, options.seed, options.steps, len(images))
        base_ch = config.get_int("wgan.base_ch")

        img_channels, img_size = images.shape[1], images.shape[2]
        generator = build_dcgan_generator(cfg.latent_dim, img_size, img_channels, base_ch, seed=options.seed)
        critic = build_discriminator(img_size, img_channels, base_ch, head="linear", seed=options.seed + 1)
        report = train_wgan(generator, critic, images, cfg)

        save_checkpoint(
            {"generator": generator, "critic": critic},
            {"step": cfg.steps, "seed": options.seed},
            options.out / "wgan.bin",
        )
        report.to_frame().to_csv(options.out / "train_wgan.csv", index=False)
