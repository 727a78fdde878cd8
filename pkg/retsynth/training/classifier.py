"""
Classifier training with the two-phase learning-rate schedule and random
affine augmentation.

The learning rate is schedule[0] for the first half of the epochs and
schedule[1] afterwards. Each training sample is affinely transformed with
probability augment_prob every epoch. Validation accuracy is recorded per
epoch and the best-validation weights are restored at the end.
"""

import logging
import time
import numpy as np
from scipy import ndimage
from tqdm import tqdm
from ..autodiff import Tensor, losses
from ..load.checkpoint import save_checkpoint
from ..shared.errors import ConfigurationError
from ..shared.utils import guess_n_loops
from .optim import Optimizer, OptimizerConfig
from .report import TrainReport

logger = logging.getLogger(__name__)

DEFAULT_SCHEDULE = (1e-4, 1e-5)
MAX_ROTATION_DEG = 15.0
MAX_SHIFT_FRAC = 0.1
FLIP_PROB = 0.5


def scheduled_lr(epoch, epochs, schedule=DEFAULT_SCHEDULE):
    """first-phase rate while epoch < epochs / 2, second-phase rate afterwards"""
    if epochs < 1:
        raise ConfigurationError(f"epochs must be >= 1, got {epochs}")
    first, second = schedule
    return first if epoch < epochs / 2 else second


def affine_augment(
    image,
    prob,
    rng,
    max_rotation=MAX_ROTATION_DEG,
    max_shift=MAX_SHIFT_FRAC,
    flip_prob=FLIP_PROB,
):
    """with probability prob applies a random rotation, translation and horizontal flip

    Resampling is bilinear around the image center; uncovered pixels take the
    image minimum, so the output stays within the input range. One uniform
    draw decides whether to transform, so the rng advances the same way for
    every call.

    Args:
        image (np.ndarray): C x H x W in [-1, 1]
        prob (float): probability of transforming, in [0, 1]
        rng (np.random.Generator): randomness source
        max_rotation (float, optional): rotation range in degrees. Defaults to 15.
        max_shift (float, optional): translation range as a fraction of H/W. Defaults to 0.1.
        flip_prob (float, optional): horizontal flip probability. Defaults to 0.5.

    Returns:
        np.ndarray: same shape and dtype, values within [image.min(), image.max()]
    """
    if not 0.0 <= prob <= 1.0:
        raise ConfigurationError(f"augment prob must be in [0, 1], got {prob}")
    if rng.random() >= prob:
        return image

    _, height, width = image.shape
    angle = np.deg2rad(rng.uniform(-max_rotation, max_rotation))
    shift = np.array(
        [rng.uniform(-max_shift, max_shift) * height, rng.uniform(-max_shift, max_shift) * width]
    )
    flip = rng.random() < flip_prob

    source = image[:, :, ::-1] if flip else image
    fill = float(image.min())
    # output (row, col) -> input: R^-1 (o - center - shift) + center
    inverse = np.array([[np.cos(angle), np.sin(angle)], [-np.sin(angle), np.cos(angle)]])
    center = np.array([(height - 1) / 2.0, (width - 1) / 2.0])
    offset = center - inverse @ (center + shift)

    out = np.stack(
        [
            ndimage.affine_transform(
                channel.astype(np.float64), inverse, offset=offset, order=1, mode="constant", cval=fill
            )
            for channel in source
        ]
    )
    return np.clip(out, fill, float(image.max())).astype(image.dtype)


def _split_arrays(dataset, split):
    if hasattr(dataset, "load_arrays"):
        return dataset.load_arrays(split)
    images, labels = dataset[split]
    return np.asarray(images), np.asarray(labels)


def accuracy(network, images, labels, batch_size=64):
    if len(images) == 0:
        return float("nan")
    logits = network.predict(images, batch_size)
    return float(np.mean(np.argmax(logits, axis=1) == labels))


def train_classifier(
    net,
    dataset,
    epochs=40,
    lr_schedule=DEFAULT_SCHEDULE,
    augment_prob=0.7,
    seed=0,
    batch_size=32,
    optimizer="adam",
    checkpoint_path=None,
):
    """trains with softmax cross-entropy and keeps the best-validation weights

    Args:
        net (Network): built by build_classifier
        dataset (DatasetManifest | dict): manifest with splits, or
            {split: (images, labels)} arrays
        epochs (int, optional): number of passes. Defaults to 40.
        lr_schedule (tuple, optional): (first-half lr, second-half lr). Defaults to (1e-4, 1e-5).
        augment_prob (float, optional): per-sample augmentation probability. Defaults to 0.7.
        seed (int, optional): batch order and augmentation seed. Defaults to 0.
        batch_size (int, optional): samples per update. Defaults to 32.
        optimizer (str, optional): optimizer kind. Defaults to "adam".
        checkpoint_path (str | Path, optional): where to save the best weights

    Raises:
        ConfigurationError: empty train/val split or epochs < 1

    Returns:
        TrainReport: per-epoch loss, val_accuracy and lr; extra holds best_epoch,
        best_val_accuracy, updates_per_epoch, test_accuracy and the checkpoint path
    """
    if epochs < 1:
        raise ConfigurationError(f"epochs must be >= 1, got {epochs}")
    train_x, train_y = _split_arrays(dataset, "train")
    val_x, val_y = _split_arrays(dataset, "val")
    for name, split in (("train", train_x), ("val", val_x)):
        if len(split) == 0:
            raise ConfigurationError(f"classifier training needs a non-empty {name} split")
    num_classes = net.spec.get("num_classes")
    if num_classes is not None and (train_y.max() >= num_classes or train_y.min() < 0):
        raise ConfigurationError(f"train labels outside [0, {num_classes})")

    rng = np.random.default_rng(seed)
    opt = Optimizer(net, OptimizerConfig(kind=optimizer, lr=lr_schedule[0]))
    report = TrainReport(index_name="epoch")
    best = (-1.0, -1, None)
    started = time.perf_counter()
    n_batches = guess_n_loops(len(train_x), batch_size)

    for epoch in tqdm(range(epochs), desc="train-classifier", leave=False):
        opt.lr = scheduled_lr(epoch, epochs, lr_schedule)
        net.train()
        order = rng.permutation(len(train_x))
        epoch_losses = []
        for batch in tqdm(
            np.array_split(order, n_batches), total=n_batches, desc=f"epoch {epoch}", leave=False
        ):
            images = np.stack([affine_augment(train_x[i], augment_prob, rng) for i in batch])
            loss = losses(net(Tensor(images)), train_y[batch], "softmax_xent")
            opt.zero_grad()
            loss.backward()
            opt.step()
            epoch_losses.append(loss.item())

        val_accuracy = accuracy(net, val_x, val_y)
        report.record(loss=np.mean(epoch_losses), val_accuracy=val_accuracy, lr=opt.lr)
        logger.info(
            "epoch %s: loss %.4f, val accuracy %.3f, lr %s",
            epoch,
            np.mean(epoch_losses),
            val_accuracy,
            opt.lr,
        )
        if val_accuracy > best[0]:
            best = (val_accuracy, epoch, net.state_dict())

    net.load_state_dict(best[2])
    net.zero_grad()
    report.wall_time = time.perf_counter() - started
    report.checksum = net.checksum()
    report.extra.update(best_epoch=best[1], best_val_accuracy=best[0], updates_per_epoch=n_batches)

    test_x, test_y = _split_arrays(dataset, "test")
    report.extra["test_accuracy"] = accuracy(net, test_x, test_y)
    logger.info(
        "best val accuracy %.3f at epoch %s, test accuracy %.3f",
        best[0],
        best[1],
        report.extra["test_accuracy"],
    )

    if checkpoint_path is not None:
        save_checkpoint({"classifier": net}, {"step": 0, "epoch": best[1], "seed": seed}, checkpoint_path)
        report.extra["checkpoint"] = str(checkpoint_path)
    return report.validate()
