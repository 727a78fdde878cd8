"""
Procedural retinal images standing in for a clinical corpus.

Every image is a dark circular fundus disk with vessel curves. Drusen images
add 5-15 small non-overlapping bright dots (yellow-tinted on CFP), GA images
add one large demarcated bright patch and healthy images add neither. Each
image is a pure function of (kind, modality, seed, index).

Intensities are built in [0, 1] and mapped to [-1, 1]. Everything except
lesions stays below a mean-channel intensity of 0.5, so thresholding at 0.5
isolates lesion pixels.
"""

import logging
from pathlib import Path
import numpy as np
import pandas as pd
from tqdm import tqdm
from ..shared.assign_unique_ids import assign_unique_ids
from ..shared.constants import CLASSES, MODALITIES, MODALITY_CHANNELS
from ..shared.errors import ConfigurationError
from .codec import image_suffix, save_image

logger = logging.getLogger(__name__)

CORPUS_SIZES = (32, 64)
QUADRANTS = ("top-left", "top-right", "bottom-left", "bottom-right")
LESION_THRESHOLD = 0.5
DISK_RADIUS_FRAC = 0.45

# [0, 1] colours per modality; FA is gray-scale
FUNDUS = {"CFP": (0.55, 0.25, 0.10), "FA": (0.18,)}
VESSEL = {"CFP": (0.30, 0.10, 0.05), "FA": (0.40,)}
DRUSEN = {"CFP": (1.00, 0.95, 0.55), "FA": (0.90,)}
GA_PATCH = {"CFP": (0.90, 0.75, 0.55), "FA": (0.85,)}

DRUSEN_COUNT = (5, 15)
DRUSEN_RADII = {32: (1, 2), 64: (2, 3)}
NOISE_STD = 0.01


def _disk_geometry(img_size):
    center = (img_size - 1) / 2.0
    return center, DISK_RADIUS_FRAC * img_size


def disk_mask(img_size):
    """boolean H x W mask of the fundus disk"""
    center, radius = _disk_geometry(img_size)
    rows, cols = np.mgrid[:img_size, :img_size]
    return (rows - center) ** 2 + (cols - center) ** 2 <= radius**2


def quadrant_mask(img_size, quadrant):
    """boolean H x W mask of one image quadrant"""
    if quadrant not in QUADRANTS:
        raise ConfigurationError(f"quadrant must be one of {QUADRANTS}, got {quadrant}")
    half = img_size // 2
    mask = np.zeros((img_size, img_size), dtype=bool)
    rows = slice(0, half) if quadrant.startswith("top") else slice(half, img_size)
    cols = slice(0, half) if quadrant.endswith("left") else slice(half, img_size)
    mask[rows, cols] = True
    return mask


def _paint(canvas, mask, colour):
    for channel, value in enumerate(colour):
        canvas[channel][mask] = value


def _draw_vessels(canvas, inside, modality, rng):
    img_size = canvas.shape[1]
    center, radius = _disk_geometry(img_size)
    origin = np.array([center + rng.uniform(-0.1, 0.1) * radius, center + 0.45 * radius])
    base_angles = np.deg2rad([150, 190, 230, 330, 30])
    for base in base_angles + rng.uniform(-0.2, 0.2, size=len(base_angles)):
        wiggle, frequency = rng.uniform(0.1, 0.35), rng.uniform(1.0, 3.0)
        steps = np.linspace(0.0, 1.6 * radius, int(8 * radius))
        angles = base + wiggle * np.sin(frequency * steps / radius * np.pi)
        rows = np.rint(origin[0] + steps * np.sin(angles)).astype(int)
        cols = np.rint(origin[1] + steps * np.cos(angles)).astype(int)
        keep = (rows >= 0) & (rows < img_size) & (cols >= 0) & (cols < img_size)
        mask = np.zeros_like(inside)
        mask[rows[keep], cols[keep]] = True
        _paint(canvas, mask & inside, VESSEL[modality])


def _circle(img_size, row, col, radius):
    rows, cols = np.mgrid[:img_size, :img_size]
    return (rows - row) ** 2 + (cols - col) ** 2 <= radius**2


def _draw_drusen(canvas, allowed, img_size, modality, rng):
    low, high = DRUSEN_RADII[img_size]
    target = int(rng.integers(DRUSEN_COUNT[0], DRUSEN_COUNT[1] + 1))
    candidates = np.argwhere(allowed)
    placed = []
    for _ in range(4000):
        if len(placed) == target:
            break
        row, col = candidates[rng.integers(len(candidates))]
        radius = int(rng.integers(low, high + 1))
        circle = _circle(img_size, row, col, radius)
        if (circle & ~allowed).any():
            continue
        # at least one clear pixel between neighbouring dots
        if any(np.hypot(row - r, col - c) < radius + other + 2 for r, c, other in placed):
            continue
        placed.append((row, col, radius))
        _paint(canvas, circle, DRUSEN[modality])
    assert len(placed) >= DRUSEN_COUNT[0], f"placed only {len(placed)} drusen"
    return len(placed)


def _draw_ga(canvas, allowed, img_size, modality, rng):
    candidates = np.argwhere(allowed)
    for _ in range(4000):
        row, col = candidates[rng.integers(len(candidates))]
        radii = rng.uniform(0.12, 0.2, size=2) * img_size
        rows, cols = np.mgrid[:img_size, :img_size]
        patch = ((rows - row) / radii[0]) ** 2 + ((cols - col) / radii[1]) ** 2 <= 1.0
        if not (patch & ~allowed).any():
            _paint(canvas, patch, GA_PATCH[modality])
            return 1
    raise AssertionError("could not place a GA patch")


def render_image(kind, modality, img_size, rng, quadrant=None):
    """draws one image

    Args:
        kind (str): drusen, ga or healthy
        modality (str): CFP (3 channels) or FA (1 channel)
        img_size (int): 32 or 64
        rng (np.random.Generator): the image's own randomness
        quadrant (str, optional): confine lesions to this quadrant

    Returns:
        np.ndarray: C x H x W float32 in [-1, 1]
    """
    inside = disk_mask(img_size)
    canvas = np.zeros((MODALITY_CHANNELS[modality], img_size, img_size))
    _paint(canvas, inside, FUNDUS[modality])

    # brighter towards the centre
    center, radius = _disk_geometry(img_size)
    rows, cols = np.mgrid[:img_size, :img_size]
    falloff = 1.0 - 0.3 * ((rows - center) ** 2 + (cols - center) ** 2) / radius**2
    canvas *= np.where(inside, falloff, 0.0)[None]
    _draw_vessels(canvas, inside, modality, rng)

    allowed = inside if quadrant is None else inside & quadrant_mask(img_size, quadrant)
    if kind == "drusen":
        _draw_drusen(canvas, allowed, img_size, modality, rng)
    elif kind == "ga":
        _draw_ga(canvas, allowed, img_size, modality, rng)

    canvas += np.where(inside, rng.normal(0.0, NOISE_STD, size=canvas.shape), 0.0)
    return (2.0 * np.clip(canvas, 0.0, 1.0) - 1.0).astype(np.float32)


def lesion_mask(image):
    """pixels whose mean-channel [0, 1] intensity is above the lesion threshold"""
    intensity = (np.asarray(image, dtype=np.float64).mean(axis=0) + 1.0) / 2.0
    return intensity > LESION_THRESHOLD


def synth_corpus(kind, modality, n, img_size, seed, out_dir, quadrant=None):
    """renders n images into out_dir and returns their manifest

    Raises:
        ConfigurationError: unknown kind/modality, n < 1 or unsupported size

    Returns:
        DatasetManifest: rows with provenance "real" and no split yet
    """
    # local import: transform depends on extract
    from ..transform.manifest import DatasetManifest

    if kind not in CLASSES:
        raise ConfigurationError(f"kind must be one of {CLASSES}, got {kind}")
    if modality not in MODALITIES:
        raise ConfigurationError(f"modality must be one of {MODALITIES}, got {modality}")
    if n < 1:
        raise ConfigurationError(f"n must be >= 1, got {n}")
    if img_size not in CORPUS_SIZES:
        raise ConfigurationError(f"img_size must be one of {CORPUS_SIZES}, got {img_size}")

    out_dir = Path(out_dir)
    suffix = image_suffix(MODALITY_CHANNELS[modality])
    rows = []
    for index in tqdm(range(n), desc=f"synth {kind}-{modality}", leave=False):
        rng = np.random.default_rng([seed, CLASSES.index(kind), MODALITIES.index(modality), index])
        image = render_image(kind, modality, img_size, rng, quadrant)
        name = f"{kind}_{modality}_{seed}_{index:05d}{suffix}"
        save_image(image, out_dir / name)
        rows.append(
            {"path": name, "label": kind, "modality": modality, "split": "", "provenance": "real"}
        )

    df = assign_unique_ids(pd.DataFrame(rows), "path", "label", "modality")
    logger.info("rendered %s %s-%s images of %s px into %s", n, kind, modality, img_size, out_dir)
    return DatasetManifest(df, root=out_dir, seed=seed)
