"""assigns train/val/test splits to a manifest"""

import logging
from ...shared.constants import MANIFEST_FILENAME
from ...transform.split import MIN_PER_CLASS, split_dataset
from ..base import BaseCommand, read_manifest

logger = logging.getLogger(__name__)


class Command(BaseCommand):
    help = "stratified train/val/test split of a manifest"

    def add_arguments(self, parser):
        parser.add_argument("--manifest", required=True, help="manifest.csv or its directory")
        parser.add_argument("--ratios", type=float, nargs=3, default=None, help="train val test fractions")

    def handle(self, options, config):
        ratios = options.ratios or config.get_list("split.ratios")
        manifest = split_dataset(read_manifest(options.manifest), ratios, options.seed)
        manifest = manifest.rebase(options.out)
        stratified = manifest.df.groupby("label").size().min() >= MIN_PER_CLASS
        manifest.validate(check_files=False, ratios=ratios if stratified else None)
        manifest.to_csv(options.out / MANIFEST_FILENAME)
        manifest.counts().to_csv(options.out / "split_counts.csv", index=False)
