"""renders a synthetic retinal corpus and its manifest"""

import logging
import pandas as pd
from ...extract.corpus import QUADRANTS, synth_corpus
from ...shared.constants import CLASSES, MANIFEST_FILENAME
from ...shared.standardize import standardize_label, standardize_modality
from ...transform.manifest import DatasetManifest
from ..base import BaseCommand, option_or_config

logger = logging.getLogger(__name__)


class Command(BaseCommand):
    help = "render drusen, GA or healthy images into --out with a manifest.csv"

    def add_arguments(self, parser):
        parser.add_argument("--kind", nargs="+", default=None, help=f"one or more of {CLASSES}")
        parser.add_argument("--modality", default=None, help="CFP or FA")
        parser.add_argument("--n", type=int, default=None, help="images per kind")
        parser.add_argument("--img-size", type=int, default=None, help="32 or 64")
        parser.add_argument("--quadrant", default=None, choices=QUADRANTS, help="confine lesions to one quadrant")

    def handle(self, options, config):
        kinds = options.kind or [config.get_str("corpus.kind")]
        modality = standardize_modality(options.modality or config.get_str("corpus.modality"))
        n = option_or_config(options.n, config, "corpus.n")
        img_size = option_or_config(options.img_size, config, "corpus.img_size")
        quadrant = options.quadrant or config.get_str("corpus.quadrant")

        manifests = [
            synth_corpus(standardize_label(kind), modality, n, img_size, options.seed, options.out, quadrant)
            for kind in kinds
        ]
        manifest = DatasetManifest(pd.concat([m.df for m in manifests], ignore_index=True), root=options.out)
        manifest.validate(check_files=False)
        manifest.to_csv(options.out / MANIFEST_FILENAME)
