"""
Builders for every architecture of the pipeline.

Each builder records its kwargs as the network spec and its registry key as
the network kind, so a checkpoint can rebuild the same topology before
loading weights. Every built network runs a one-sample smoke test.
"""

import logging
import numpy as np
from ..shared.constants import DISCRIMINATOR_SIZES, GENERATOR_SIZES
from ..shared.errors import ConfigurationError
from .layers import (
    Activation,
    BatchNorm2d,
    Conv2d,
    ConvTranspose2d,
    Linear,
    Pool,
    Reshape,
    Tap,
)
from .network import Network

logger = logging.getLogger(__name__)

ENCODER_WIDTHS = (16, 32, 64, 128)
LEVELS = (1, 2, 3, 4)


def _finish(network):
    network.smoke_test()
    logger.info(
        "built %s %s with %s parameters", network.kind, network.spec, network.num_parameters()
    )
    return network


def build_dcgan_generator(latent_dim=100, img_size=64, img_channels=3, base_ch=64, seed=0):
    """DCGAN generator: z -> (8 base_ch) x 4 x 4 -> stride-2 transposed convs -> tanh

    Convolutions feeding batchnorm carry no bias; the final transposed conv does.

    Args:
        latent_dim (int, optional): size of z. Defaults to 100.
        img_size (int, optional): 32 or 64. Defaults to 64.
        img_channels (int, optional): 1 (FA) or 3 (CFP). Defaults to 3.
        base_ch (int, optional): channel width of the last hidden block, >= 8. Defaults to 64.
        seed (int, optional): weight init seed. Defaults to 0.

    Raises:
        ConfigurationError: unsupported size, channel count or width

    Returns:
        Network: kind "dcgan_generator", output N x img_channels x img_size x img_size
    """
    if img_size not in GENERATOR_SIZES:
        raise ConfigurationError(
            f"generator img_size must be one of {GENERATOR_SIZES} (64x64 is the DCGAN cap), "
            f"got {img_size}"
        )
    if img_channels not in (1, 3):
        raise ConfigurationError(f"img_channels must be 1 or 3, got {img_channels}")
    if base_ch < 8:
        raise ConfigurationError(f"base_ch must be >= 8, got {base_ch}")
    if latent_dim < 1:
        raise ConfigurationError(f"latent_dim must be >= 1, got {latent_dim}")

    rng = np.random.default_rng(seed)
    channels = 8 * base_ch
    layers = [
        Linear("project", latent_dim, channels * 16, bias=False, rng=rng),
        Reshape("project_reshape", (channels, 4, 4)),
        BatchNorm2d("project_bn", channels, rng=rng),
        Activation("project_relu", "relu"),
    ]

    size, block = 4, 1
    while size * 2 < img_size:
        layers += [
            ConvTranspose2d(f"up{block}", channels, channels // 2, 4, 2, 1, bias=False, rng=rng),
            BatchNorm2d(f"up{block}_bn", channels // 2, rng=rng),
            Activation(f"up{block}_relu", "relu"),
        ]
        channels, size, block = channels // 2, size * 2, block + 1
    layers += [
        ConvTranspose2d(f"up{block}", channels, img_channels, 4, 2, 1, bias=True, rng=rng),
        Activation("out_tanh", "tanh"),
    ]

    spec = dict(latent_dim=latent_dim, img_size=img_size, img_channels=img_channels, base_ch=base_ch, seed=seed)
    return _finish(Network("dcgan_generator", layers, (latent_dim,), spec))


def build_discriminator(img_size=64, img_channels=3, base_ch=64, head="sigmoid", seed=0):
    """stride-2 conv blocks down to 4 x 4, then a 4 x 4 conv to one scalar per sample

    Blocks use leaky_relu(0.2) and batchnorm on all but the first. A sigmoid head
    gives the GAN discriminator, a linear head the Wasserstein critic.

    Raises:
        ConfigurationError: unsupported size, channel count or head
    """
    if img_size not in DISCRIMINATOR_SIZES:
        raise ConfigurationError(
            f"discriminator img_size must be one of {DISCRIMINATOR_SIZES}, got {img_size}"
        )
    if img_channels not in (1, 3):
        raise ConfigurationError(f"img_channels must be 1 or 3, got {img_channels}")
    if base_ch < 8:
        raise ConfigurationError(f"base_ch must be >= 8, got {base_ch}")
    if head not in ("sigmoid", "linear"):
        raise ConfigurationError(f"head must be sigmoid or linear, got {head}")

    rng = np.random.default_rng(seed)
    layers = []
    in_ch, out_ch, size, block = img_channels, base_ch, img_size, 1
    while size > 4:
        layers.append(Conv2d(f"down{block}", in_ch, out_ch, 4, 2, 1, bias=False, rng=rng))
        if block > 1:
            layers.append(BatchNorm2d(f"down{block}_bn", out_ch, rng=rng))
        layers.append(Activation(f"down{block}_lrelu", "leaky_relu", slope=0.2))
        in_ch, out_ch, size, block = out_ch, out_ch * 2, size // 2, block + 1
    layers += [
        Conv2d("score", in_ch, 1, 4, 1, 0, bias=True, rng=rng),
        Reshape("score_flat", (1,)),
    ]
    if head == "sigmoid":
        layers.append(Activation("out_sigmoid", "sigmoid"))

    spec = dict(img_size=img_size, img_channels=img_channels, base_ch=base_ch, head=head, seed=seed)
    return _finish(Network("discriminator", layers, (img_channels, img_size, img_size), spec))


def _check_level(level):
    if level not in LEVELS:
        raise ConfigurationError(f"level must be one of {LEVELS}, got {level}")


def build_encoder(level, img_channels=3, img_size=32, seed=0):
    """level k: k conv3x3-relu blocks with avg_pool2 between them, tap enc_level_j after block j

    Fully convolutional; img_size only sets the build-time probe.
    """
    _check_level(level)
    if img_size % 2 ** (level - 1):
        raise ConfigurationError(f"img_size {img_size} not divisible by {2 ** (level - 1)}")

    rng = np.random.default_rng(seed)
    layers, in_ch = [], img_channels
    for depth in range(1, level + 1):
        width = ENCODER_WIDTHS[depth - 1]
        if depth > 1:
            layers.append(Pool(f"enc{depth}_pool", "avg_pool2"))
        layers += [
            Conv2d(f"enc{depth}_conv", in_ch, width, 3, 1, 1, rng=rng),
            Activation(f"enc{depth}_relu", "relu"),
            Tap(f"enc_level_{depth}"),
        ]
        in_ch = width

    spec = dict(level=level, img_channels=img_channels, img_size=img_size, seed=seed)
    return _finish(
        Network(
            "encoder",
            layers,
            (img_channels, None, None),
            spec,
            probe_shape=(img_channels, img_size, img_size),
        )
    )


def build_decoder(level, img_channels=3, img_size=32, seed=0):
    """mirror of build_encoder: conv3x3-relu then nearest_upsample2 per level, final linear conv"""
    _check_level(level)
    if img_size % 2 ** (level - 1):
        raise ConfigurationError(f"img_size {img_size} not divisible by {2 ** (level - 1)}")

    rng = np.random.default_rng(seed)
    layers = []
    for depth in range(level, 1, -1):
        layers += [
            Conv2d(f"dec{depth}_conv", ENCODER_WIDTHS[depth - 1], ENCODER_WIDTHS[depth - 2], 3, 1, 1, rng=rng),
            Activation(f"dec{depth}_relu", "relu"),
            Pool(f"dec{depth}_up", "nearest_upsample2"),
        ]
    layers.append(Conv2d("dec1_conv", ENCODER_WIDTHS[0], img_channels, 3, 1, 1, rng=rng))

    entry = ENCODER_WIDTHS[level - 1]
    probe = img_size // 2 ** (level - 1)
    spec = dict(level=level, img_channels=img_channels, img_size=img_size, seed=seed)
    return _finish(
        Network("decoder", layers, (entry, None, None), spec, probe_shape=(entry, probe, probe))
    )


def build_classifier(num_classes, img_size=64, img_channels=3, base_ch=16, seed=0):
    """CAM-compatible CNN: conv blocks -> "final_conv" -> global average pool -> one linear layer

    Raises:
        ConfigurationError: fewer than two classes or img_size not a multiple of 4
    """
    if num_classes < 2:
        raise ConfigurationError(f"num_classes must be >= 2, got {num_classes}")
    if img_size < 8 or img_size % 4:
        raise ConfigurationError(f"classifier img_size must be a multiple of 4 >= 8, got {img_size}")
    if img_channels not in (1, 3):
        raise ConfigurationError(f"img_channels must be 1 or 3, got {img_channels}")

    rng = np.random.default_rng(seed)
    widths = (base_ch, 2 * base_ch, 4 * base_ch)
    layers, in_ch = [], img_channels
    for block, width in enumerate(widths, start=1):
        layers += [
            Conv2d(f"conv{block}", in_ch, width, 3, 1, 1, bias=False, rng=rng),
            BatchNorm2d(f"conv{block}_bn", width, rng=rng),
            Activation(f"conv{block}_relu", "relu"),
        ]
        if block < len(widths):
            layers.append(Pool(f"conv{block}_pool", "avg_pool2"))
        in_ch = width
    layers += [
        Tap("final_conv"),
        Pool("gap", "global_avg"),
        Linear("logits", in_ch, num_classes, rng=rng),
    ]

    spec = dict(num_classes=num_classes, img_size=img_size, img_channels=img_channels, base_ch=base_ch, seed=seed)
    network = Network("classifier", layers, (img_channels, img_size, img_size), spec)
    network.cam_head()
    return _finish(network)


def build_mlp(in_dim, hidden=(), out_dim=1, head="linear", seed=0):
    """dense layers with relu between them; used by the 1-D toy WGAN"""
    if head not in ("linear", "sigmoid", "tanh"):
        raise ConfigurationError(f"head must be linear, sigmoid or tanh, got {head}")
    rng = np.random.default_rng(seed)
    layers, width = [], in_dim
    for index, size in enumerate(hidden, start=1):
        layers += [Linear(f"fc{index}", width, size, rng=rng), Activation(f"fc{index}_relu", "relu")]
        width = size
    layers.append(Linear("out", width, out_dim, rng=rng))
    if head != "linear":
        layers.append(Activation(f"out_{head}", head))

    spec = dict(in_dim=in_dim, hidden=list(hidden), out_dim=out_dim, head=head, seed=seed)
    return _finish(Network("mlp", layers, (in_dim,), spec))


BUILDERS = {
    "dcgan_generator": build_dcgan_generator,
    "discriminator": build_discriminator,
    "encoder": build_encoder,
    "decoder": build_decoder,
    "classifier": build_classifier,
    "mlp": build_mlp,
}


def build_network(kind, **spec):
    """rebuilds a network from its registry kind and spec

    Raises:
        ConfigurationError: unknown kind or bad spec
    """
    if kind not in BUILDERS:
        raise ConfigurationError(f"unknown network kind '{kind}', expected one of {sorted(BUILDERS)}")
    try:
        return BUILDERS[kind](**spec)
    except TypeError as exc:
        raise ConfigurationError(f"bad spec for {kind}: {spec}") from exc
