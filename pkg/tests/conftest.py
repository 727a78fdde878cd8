"""shared fixtures: seeded randomness, tiny networks and a small on-disk corpus"""

import numpy as np
import pandas as pd
import pytest
from retsynth.extract.corpus import synth_corpus
from retsynth.networks import build_classifier, build_dcgan_generator, build_discriminator
from retsynth.transform.manifest import DatasetManifest


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def tiny_generator():
    return build_dcgan_generator(latent_dim=8, img_size=32, img_channels=1, base_ch=8, seed=0)


@pytest.fixture
def tiny_critic():
    return build_discriminator(img_size=32, img_channels=1, base_ch=8, head="linear", seed=1)


@pytest.fixture
def tiny_classifier():
    return build_classifier(num_classes=3, img_size=16, img_channels=1, base_ch=8, seed=0)


@pytest.fixture
def corpus_dir(tmp_path):
    """six FA images per class at 32 px with a combined manifest.csv"""
    manifests = [synth_corpus(kind, "FA", 6, 32, 7, tmp_path) for kind in ("drusen", "ga", "healthy")]
    manifest = DatasetManifest(pd.concat([m.df for m in manifests], ignore_index=True), root=tmp_path)
    manifest.to_csv(tmp_path / "manifest.csv")
    return tmp_path
