import numpy as np
import pytest
from scipy import ndimage
from retsynth.extract import (
    QUADRANTS,
    disk_mask,
    lesion_mask,
    load_image,
    quadrant_mask,
    render_image,
    synth_corpus,
)
from retsynth.shared.errors import ConfigurationError


def render(kind, modality="CFP", size=64, seed=0, quadrant=None):
    return render_image(kind, modality, size, np.random.default_rng(seed), quadrant)


@pytest.mark.parametrize("modality,channels", [("CFP", 3), ("FA", 1)])
def test_rendered_images_have_modality_channels(modality, channels):
    image = render("healthy", modality, 32)
    assert image.shape == (channels, 32, 32)
    assert image.dtype == np.float32
    assert image.min() >= -1.0 and image.max() <= 1.0


def test_outside_the_disk_is_black():
    image = render("drusen")
    assert np.all(image[:, ~disk_mask(64)] == -1.0)


@pytest.mark.parametrize("size", [32, 64])
@pytest.mark.parametrize("seed", range(4))
def test_drusen_images_hold_separate_dots(size, seed):
    _, count = ndimage.label(lesion_mask(render("drusen", size=size, seed=seed)))
    assert count >= 5


def test_healthy_images_have_no_lesions():
    for seed in range(4):
        assert not lesion_mask(render("healthy", seed=seed)).any()


def test_lesion_classes_are_brighter_than_healthy():
    healthy = np.mean([render("healthy", seed=seed).mean() for seed in range(4)])
    for kind in ("drusen", "ga"):
        lesioned = np.mean([render(kind, seed=seed).mean() for seed in range(4)])
        assert lesioned - healthy > 0.02


@pytest.mark.parametrize("quadrant", QUADRANTS)
def test_lesions_stay_in_their_quadrant(quadrant):
    for kind in ("drusen", "ga"):
        mask = lesion_mask(render(kind, seed=3, quadrant=quadrant))
        assert mask.any()
        assert not (mask & ~quadrant_mask(64, quadrant)).any()


def test_quadrant_mask_rejects_unknown_names():
    with pytest.raises(ConfigurationError):
        quadrant_mask(32, "centre")


def test_synth_corpus_writes_images_and_manifest(tmp_path):
    manifest = synth_corpus("ga", "FA", 3, 32, 5, tmp_path)
    df = manifest.df
    assert len(df) == 3
    assert set(df.label) == {"ga"} and set(df.modality) == {"FA"} and set(df.provenance) == {"real"}
    assert df.image_id.is_unique
    for path in manifest.paths():
        assert path.suffix == ".pgm"
        assert load_image(path).shape == (1, 32, 32)


def test_synth_corpus_is_deterministic(tmp_path):
    first = synth_corpus("drusen", "CFP", 2, 32, 11, tmp_path / "a")
    second = synth_corpus("drusen", "CFP", 2, 32, 11, tmp_path / "b")
    for left, right in zip(first.paths(), second.paths()):
        assert left.read_bytes() == right.read_bytes()


@pytest.mark.parametrize(
    "kwargs",
    [
        {"kind": "cataract"},
        {"modality": "OCT"},
        {"n": 0},
        {"img_size": 48},
    ],
)
def test_synth_corpus_validation(tmp_path, kwargs):
    args = {"kind": "drusen", "modality": "CFP", "n": 1, "img_size": 32, "seed": 0, "out_dir": tmp_path}
    args.update(kwargs)
    with pytest.raises(ConfigurationError):
        synth_corpus(**args)
