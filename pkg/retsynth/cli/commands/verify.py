"""average-probability verification of a set of images"""

import logging
import pandas as pd
from ...load.checkpoint import load_checkpoint
from ...verify import VerificationTable, relation_frame, relation_report, verify_images
from ..base import BaseCommand, modality_for, read_images

logger = logging.getLogger(__name__)


def load_classifier(path):
    networks, _ = load_checkpoint(path, expected_kinds={"classifier": "classifier"})
    return networks["classifier"]


class Command(BaseCommand):
    help = "mean classifier probability of the true class over a set of images, plus the relation report"

    def add_arguments(self, parser):
        parser.add_argument("--classifier", required=True, help="checkpoint written by train-classifier")
        parser.add_argument("--images", required=True, help="manifest, manifest directory or image directory")
        parser.add_argument("--true-class", required=True, help="class the images should show")
        parser.add_argument("--provenance", default=None, help="real, wgan, dcgan or styletransfer")
        parser.add_argument("--split", default=None, help="verify one split of a manifest")
        parser.add_argument("--top-n", type=int, default=None, help="classes kept in the relation report")

    def handle(self, options, config):
        classifier = load_classifier(options.classifier)
        images, _ = read_images(options.images, split=options.split)
        row = verify_images(
            classifier,
            images,
            options.true_class,
            provenance=options.provenance or config.get_str("verify.provenance"),
            modality=modality_for(images),
        )
        VerificationTable([row]).to_frame().to_csv(options.out / "verification.csv", index=False)
        pd.DataFrame(
            {"class": list(row.histogram), "top1_count": list(row.histogram.values())}
        ).to_csv(options.out / "top1_histogram.csv", index=False)

        top_n = options.top_n if options.top_n is not None else config.get_int("verify.top_n")
        relation_frame(relation_report(classifier, images, top_n)).to_csv(options.out / "relation.csv", index=False)
