"""adds generated images to the training split of a real manifest"""

import logging
from ...shared.constants import MANIFEST_FILENAME
from ..base import BaseCommand, read_manifest

logger = logging.getLogger(__name__)


class Command(BaseCommand):
    help = "merge generated manifests into the train split of a real manifest"

    def add_arguments(self, parser):
        parser.add_argument("--manifest", required=True, help="split manifest of real images")
        parser.add_argument("--generated", nargs="+", required=True, help="manifests of generated images")
        parser.add_argument("--split", default="train", help="split the generated rows join")

    def handle(self, options, config):
        merged = read_manifest(options.manifest).rebase(options.out)
        for path in options.generated:
            merged = merged.merge(read_manifest(path), split=options.split)
        merged.validate()
        merged.to_csv(options.out / MANIFEST_FILENAME)
        merged.counts().to_csv(options.out / "split_counts.csv", index=False)
