"""trains the CAM-compatible verification classifier"""

import logging
import pandas as pd
from ...networks import build_classifier
from ...shared.standardize import standardize_modality
from ...training import train_classifier
from ..base import BaseCommand, read_manifest

logger = logging.getLogger(__name__)


class Command(BaseCommand):
    help = "train the classifier on a split manifest and keep the best-validation weights"

    def add_arguments(self, parser):
        parser.add_argument("--manifest", required=True, help="manifest with train/val/test splits")
        parser.add_argument("--modality", default=None, help="use one modality of the manifest")
        parser.add_argument("--epochs", type=int, default=None)

    def handle(self, options, config):
        manifest = read_manifest(options.manifest)
        if options.modality is not None:
            manifest = manifest.subset(modality=standardize_modality(options.modality))
        sample, _ = manifest.subset(split="train").load_arrays()

        net = build_classifier(
            len(manifest.classes),
            img_size=sample.shape[2],
            img_channels=sample.shape[1],
            base_ch=config.get_int("classifier.base_ch"),
            seed=options.seed,
        )
        report = train_classifier(
            net,
            manifest,
            epochs=options.epochs if options.epochs is not None else config.get_int("classifier.epochs"),
            lr_schedule=tuple(float(lr) for lr in config.get_list("classifier.lr_schedule")),
            augment_prob=config.get_float("classifier.augment_prob"),
            seed=options.seed,
            batch_size=config.get_int("classifier.batch_size"),
            optimizer=config.get_str("classifier.optimizer"),
            checkpoint_path=options.out / "classifier.bin",
        )
        report.to_frame().to_csv(options.out / "train_classifier.csv", index=False)
        pd.DataFrame([report.extra]).to_csv(options.out / "classifier_summary.csv", index=False)
