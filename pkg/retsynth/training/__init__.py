"""optimizers and the four training procedures"""

from .autoencoder import mean_psnr, reconstruct, train_autoencoder
from .batches import BatchStream
from .classifier import accuracy, affine_augment, scheduled_lr, train_classifier
from .gan import (
    AdversarialState,
    GanConfig,
    WganConfig,
    clip_parameters,
    clip_weights,
    gan_step,
    train_gan,
    train_wgan,
    wgan_step,
)
from .optim import Optimizer, OptimizerConfig, optimizer_step
from .report import TrainReport

__all__ = [
    "AdversarialState",
    "BatchStream",
    "GanConfig",
    "Optimizer",
    "OptimizerConfig",
    "TrainReport",
    "WganConfig",
    "accuracy",
    "affine_augment",
    "clip_parameters",
    "clip_weights",
    "gan_step",
    "mean_psnr",
    "optimizer_step",
    "reconstruct",
    "scheduled_lr",
    "train_autoencoder",
    "train_classifier",
    "train_gan",
    "train_wgan",
    "wgan_step",
]
