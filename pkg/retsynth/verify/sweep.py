"""verification value as a function of the number of training images"""

import logging
from dataclasses import replace
import numpy as np
import pandas as pd
from ..networks import LatentSampler, build_dcgan_generator, build_discriminator
from ..shared.errors import ConfigurationError
from ..shared.standardize import standardize_label
from ..training import WganConfig, train_wgan
from .verification import verify_images

logger = logging.getLogger(__name__)

SWEEP_COLUMNS = ["size", "value", "top1_accuracy", "off_class_top3_mass", "off_class_top3"]


def wgan_trainer(cfg=None, base_ch=16):
    """train_gan_fn that fits a fresh WGAN to each subset

    Args:
        cfg (WganConfig, optional): training settings; the seed is replaced per run
        base_ch (int, optional): channel base of generator and critic. Defaults to 16.

    Returns:
        Callable[[np.ndarray, int], Network]: maps (images, seed) to a trained generator
    """
    cfg = cfg or WganConfig()

    def train(images, seed):
        img_channels, img_size = images.shape[1], images.shape[2]
        generator = build_dcgan_generator(cfg.latent_dim, img_size, img_channels, base_ch, seed=seed)
        critic = build_discriminator(img_size, img_channels, base_ch, head="linear", seed=seed + 1)
        run_cfg = replace(cfg, seed=seed, batch_size=min(cfg.batch_size, len(images)))
        train_wgan(generator, critic, images, run_cfg)
        return generator

    return train


def _subset(images, size, seed):
    rng = np.random.default_rng([seed, size])
    return images[np.sort(rng.choice(len(images), size=size, replace=False))]


def _off_class(row, true_class, top=3):
    others = sorted(
        ((name, prob) for name, prob in row.mean_probs.items() if name != true_class),
        key=lambda item: -item[1],
    )[:top]
    return sum(prob for _, prob in others), ";".join(name for name, _ in others)


def sample_size_sweep(
    sizes,
    corpus,
    train_gan_fn,
    classifier,
    seed=0,
    true_class="drusen",
    n_generate=64,
    modality="CFP",
    classes=None,
):
    """trains one generator per subset size and verifies its samples

    Args:
        sizes (list[int]): ascending subset sizes, each at most len(corpus)
        corpus (np.ndarray): N x C x H x W real images of the true class
        train_gan_fn (Callable): (images, seed) -> trained generator
        classifier (Network): frozen verification classifier
        seed (int, optional): seeds subsets, training and sampling. Defaults to 0.
        true_class (str, optional): class the corpus depicts. Defaults to "drusen".
        n_generate (int, optional): samples drawn per generator. Defaults to 64.

    Raises:
        ConfigurationError: sizes empty, not ascending, non-positive or larger than the corpus

    Returns:
        pandas.DataFrame: one row per size with the verification value, top-1
        accuracy and the probability mass on the three likeliest other classes
    """
    sizes = [int(size) for size in sizes]
    corpus = np.asarray(corpus, dtype=np.float32)
    if not sizes:
        raise ConfigurationError("sweep needs at least one size")
    if any(later <= earlier for earlier, later in zip(sizes, sizes[1:])):
        raise ConfigurationError(f"sweep sizes must be strictly ascending, got {sizes}")
    if sizes[0] < 2 or sizes[-1] > len(corpus):
        raise ConfigurationError(f"sweep sizes must lie in [2, {len(corpus)}], got {sizes}")
    if n_generate < 1:
        raise ConfigurationError(f"n_generate must be >= 1, got {n_generate}")

    rows = []
    for size in sizes:
        generator = train_gan_fn(_subset(corpus, size, seed), seed)
        sampler = LatentSampler(dim=generator.spec.get("latent_dim", 100), seed=seed)
        generated = np.clip(generator.predict(sampler.sample(n_generate).numpy()), -1.0, 1.0)
        row = verify_images(classifier, generated, true_class, "wgan", modality, classes)
        mass, names = _off_class(row, standardize_label(true_class, classes))
        rows.append(
            {
                "size": size,
                "value": row.value,
                "top1_accuracy": row.top1_accuracy,
                "off_class_top3_mass": mass,
                "off_class_top3": names,
            }
        )
        logger.info("sweep size %s: value %.4f, off-class mass %.4f", size, row.value, mass)
    return pd.DataFrame(rows, columns=SWEEP_COLUMNS)
