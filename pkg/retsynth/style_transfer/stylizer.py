"""
Multi-level closed-form stylization.

At each level the content and style images are encoded, the content features
get the style's covariance and mean through the whitening-coloring transform,
and the result is decoded back to image space. `stylize` runs the levels
coarse to fine (4, 3, 2, 1), re-encoding the working image each time against
the original style image.
"""

from dataclasses import dataclass, field
import logging
from pathlib import Path
import numpy as np
import pandas as pd
from tqdm import tqdm
from ..autodiff import Tensor
from ..extract.codec import image_suffix, load_image, save_image
from ..linalg import DEFAULT_EIG_FLOOR, DEFAULT_EPS_REG, FeatureMatrix, covariance_of, wct
from ..networks import build_decoder, build_encoder
from ..shared.errors import ConfigurationError, ContractError, DimensionError

logger = logging.getLogger(__name__)

LEVEL_ORDER = (4, 3, 2, 1)
PAIRINGS = ("all_pairs", "zip")
RANGE_TOL = 1e-6


@dataclass
class StylizerStack:
    """encoder/decoder pairs for levels 1-4 and the WCT settings"""

    encoders: dict
    decoders: dict
    alpha: float = 1.0
    eps_reg: float = DEFAULT_EPS_REG
    eig_floor: float = DEFAULT_EIG_FLOOR
    img_channels: int = field(init=False)

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ConfigurationError(f"alpha must be in [0, 1], got {self.alpha}")
        if sorted(self.encoders) != list(LEVEL_ORDER[::-1]) or sorted(self.decoders) != list(LEVEL_ORDER[::-1]):
            raise ConfigurationError(
                f"stack needs levels 1-4, got encoders {sorted(self.encoders)}, decoders {sorted(self.decoders)}"
            )
        channels = {net.spec["img_channels"] for net in [*self.encoders.values(), *self.decoders.values()]}
        if len(channels) != 1:
            raise ConfigurationError(f"stack mixes channel counts {sorted(channels)}")
        self.img_channels = channels.pop()
        self.check_round_trip()

    def check_round_trip(self, size=16):
        """every level pair maps a size x size image back to the same shape"""
        probe = np.zeros((1, self.img_channels, size, size), dtype=np.float32)
        for level in LEVEL_ORDER:
            out = self.decoders[level].predict(self.encoders[level].predict(probe))
            if out.shape != probe.shape:
                raise ContractError(f"level {level} round trip gives {out.shape}, expected {probe.shape}")

    def networks(self):
        """encoders and decoders by checkpoint role"""
        roles = {f"encoder_{level}": net for level, net in self.encoders.items()}
        roles.update({f"decoder_{level}": net for level, net in self.decoders.items()})
        return roles

    @classmethod
    def from_networks(cls, networks, **settings):
        """assembles a stack from encoder_k / decoder_k roles"""
        try:
            encoders = {level: networks[f"encoder_{level}"] for level in LEVEL_ORDER}
            decoders = {level: networks[f"decoder_{level}"] for level in LEVEL_ORDER}
        except KeyError as exc:
            raise ConfigurationError(f"stylizer checkpoint lacks {exc.args[0]}") from exc
        return cls(encoders=encoders, decoders=decoders, **settings)

    def encode(self, image, level):
        return self.encoders[level].predict(image[None])[0]

    def decode(self, features, level):
        return self.decoders[level].predict(features[None])[0]


def build_stylizer_stack(img_channels=3, alpha=1.0, eps_reg=DEFAULT_EPS_REG, eig_floor=DEFAULT_EIG_FLOOR, img_size=32, seed=0):
    """untrained stack; pair k is seeded with seed + k"""
    encoders = {level: build_encoder(level, img_channels, img_size, seed + level) for level in LEVEL_ORDER}
    decoders = {level: build_decoder(level, img_channels, img_size, seed + level) for level in LEVEL_ORDER}
    return StylizerStack(encoders, decoders, alpha=alpha, eps_reg=eps_reg, eig_floor=eig_floor)


def _as_image(image, name):
    values = image.numpy() if isinstance(image, Tensor) else np.asarray(image, dtype=np.float32)
    if values.ndim == 4 and values.shape[0] == 1:
        values = values[0]
    if values.ndim != 3:
        raise DimensionError(f"{name} image must be C x H x W, got shape {values.shape}")
    if values.min() < -1.0 - RANGE_TOL or values.max() > 1.0 + RANGE_TOL:
        raise ContractError(f"{name} image must lie in [-1, 1], got [{values.min()}, {values.max()}]")
    return values


def _check_divisible(image, multiple, name):
    height, width = image.shape[1:]
    if height % multiple or width % multiple:
        raise DimensionError(f"{name} image {height}x{width}: dimensions must be multiples of {multiple}")


def stylize_single_level(content_img, style_img, level, stack):
    """wct at one encoder level, decoded and clamped to [-1, 1]

    Raises:
        DimensionError: channel mismatch or dims not divisible by 2^(level - 1)
    """
    content = _as_image(content_img, "content")
    style = _as_image(style_img, "style")
    if content.shape[0] != style.shape[0] or content.shape[0] != stack.img_channels:
        raise DimensionError(
            f"channel counts differ: content {content.shape[0]}, style {style.shape[0]}, "
            f"stack {stack.img_channels}"
        )
    multiple = 2 ** (level - 1)
    _check_divisible(content, multiple, "content")
    _check_divisible(style, multiple, "style")

    content_feat = FeatureMatrix.from_feature_map(stack.encode(content, level))
    style_feat = FeatureMatrix.from_feature_map(stack.encode(style, level))
    transformed = wct(content_feat, style_feat, stack.alpha, stack.eps_reg, stack.eig_floor)
    decoded = stack.decode(transformed.to_feature_map().astype(np.float32), level)
    return np.clip(decoded, -1.0, 1.0)


def stylize(content_img, style_img, stack):
    """levels 4, 3, 2, 1 in turn; the output of one level is the content of the next"""
    current = _as_image(content_img, "content")
    style = _as_image(style_img, "style")
    _check_divisible(current, 2 ** (max(LEVEL_ORDER) - 1), "content")
    _check_divisible(style, 2 ** (max(LEVEL_ORDER) - 1), "style")
    for level in LEVEL_ORDER:
        current = stylize_single_level(current, style, level, stack)
    return current


def encoded_covariance(image, level, stack):
    """unregularized covariance of an image's level-k features"""
    features = stack.encode(_as_image(image, "input"), level)
    return covariance_of(features.reshape(features.shape[0], -1))


def _pairs(contents, styles, pairing):
    if pairing not in PAIRINGS:
        raise ConfigurationError(f"pairing must be one of {PAIRINGS}, got {pairing}")
    if not contents or not styles:
        raise ConfigurationError("batch_stylize needs non-empty content and style sets")
    if pairing == "zip":
        if len(contents) != len(styles):
            raise ConfigurationError(
                f"zip pairing needs equal lengths, got {len(contents)} contents and {len(styles)} styles"
            )
        return list(zip(contents, styles))
    return [(content, style) for content in contents for style in styles]


def batch_stylize(content_set, style_set, pairing, stack, out_dir):
    """stylizes every pair and writes the images plus their manifest rows

    Args:
        content_set (list[str | Path]): content image files
        style_set (list[str | Path]): style image files
        pairing (str): all_pairs or zip
        stack (StylizerStack): trained stack
        out_dir (str | Path): where outputs go

    Raises:
        ConfigurationError: empty sets, unknown pairing or zip length mismatch
        ContractError: a written output is missing or does not decode

    Returns:
        pandas.DataFrame: content_path, style_path, output_path, alpha, levels
    """
    out_dir = Path(out_dir)
    pairs = _pairs([Path(p) for p in content_set], [Path(p) for p in style_set], pairing)
    suffix = image_suffix(stack.img_channels)
    styles = {}
    rows = []
    for content_path, style_path in tqdm(pairs, desc="stylize", leave=False):
        if style_path not in styles:
            styles[style_path] = load_image(style_path)
        content = load_image(content_path)
        output = stylize(content, styles[style_path], stack)
        output_path = out_dir / f"{content_path.stem}__{style_path.stem}{suffix}"
        save_image(output, output_path)
        rows.append(
            {
                "content_path": str(content_path),
                "style_path": str(style_path),
                "output_path": str(output_path),
                "alpha": stack.alpha,
                "levels": "-".join(str(level) for level in LEVEL_ORDER),
            }
        )

    df = pd.DataFrame(rows)
    for row in df.itertuples():
        if not Path(row.output_path).exists():
            raise ContractError(f"stylized output {row.output_path} was not written")
        if load_image(row.output_path).shape[0] != stack.img_channels:
            raise ContractError(f"stylized output {row.output_path} has the wrong channel count")
    logger.info("stylized %s %s pairs into %s", len(df), pairing, out_dir)
    return df
