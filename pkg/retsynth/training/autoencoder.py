"""pretrains one encoder/decoder level pair on l2 reconstruction"""

import logging
import time
import numpy as np
from tqdm import tqdm
from ..autodiff import Tensor, losses
from ..shared.errors import ConfigurationError
from ..shared.utils import psnr
from .batches import BatchStream
from .optim import Optimizer, OptimizerConfig
from .report import TrainReport

logger = logging.getLogger(__name__)

HOLDOUT_FRACTION = 0.1


def reconstruct(encoder, decoder, images, batch_size=32):
    """decode(encode(x)) in eval mode, clamped to [-1, 1]"""
    features = encoder.predict(images, batch_size)
    return np.clip(decoder.predict(features, batch_size), -1.0, 1.0)


def mean_psnr(encoder, decoder, images):
    """average per-image reconstruction PSNR in dB"""
    recon = reconstruct(encoder, decoder, images)
    return float(np.mean([psnr(out, ref) for out, ref in zip(recon, images)]))


def train_autoencoder(encoder, decoder, images, steps, lr=1e-3, batch_size=16, seed=0, held_out=None):
    """minimizes l2(decode(encode(x)), x) with adam

    Args:
        encoder (Network): build_encoder(k)
        decoder (Network): build_decoder(k), same level and channels
        images (np.ndarray): N x C x H x W training images in [-1, 1]
        steps (int): number of updates
        lr (float, optional): adam learning rate. Defaults to 1e-3.
        batch_size (int, optional): images per update. Defaults to 16.
        seed (int, optional): batch order seed. Defaults to 0.
        held_out (np.ndarray, optional): evaluation images; when None the last
            10% of `images` are held out

    Raises:
        ConfigurationError: mismatched level pair or steps < 1

    Returns:
        TrainReport: per-step loss; extra holds psnr (held-out) and level
    """
    if steps < 1:
        raise ConfigurationError(f"steps must be >= 1, got {steps}")
    for key in ("level", "img_channels"):
        if encoder.spec.get(key) != decoder.spec.get(key):
            raise ConfigurationError(
                f"encoder/decoder {key} mismatch: {encoder.spec.get(key)} vs {decoder.spec.get(key)}"
            )

    images = np.asarray(images)
    if held_out is None:
        n_held = max(1, int(round(len(images) * HOLDOUT_FRACTION)))
        images, held_out = images[:-n_held], images[-n_held:]
    stream = BatchStream(images, batch_size, seed)

    params = {**encoder.parameters(), **decoder.parameters()}
    opt = Optimizer(params, OptimizerConfig(kind="adam", lr=lr))
    report = TrainReport()
    encoder.train()
    decoder.train()
    started = time.perf_counter()

    level = encoder.spec.get("level")
    for step in tqdm(range(steps), desc=f"train-ae level {level}", leave=False):
        batch = stream()
        recon = decoder(encoder(Tensor(batch)))
        loss = losses(recon, batch, "l2")
        opt.zero_grad()
        loss.backward()
        opt.step()
        report.record(loss=loss.item())
        if (step + 1) % 500 == 0:
            logger.info("autoencoder level %s step %s: loss %.5f", level, step + 1, loss.item())

    opt.zero_grad()
    report.wall_time = time.perf_counter() - started
    report.checksum = decoder.checksum()
    report.extra.update(level=level, psnr=mean_psnr(encoder, decoder, held_out))
    logger.info("autoencoder level %s held-out psnr %.2f dB", level, report.extra["psnr"])
    return report.validate()
