"""stylizes content images with the covariance statistics of style images"""

import logging
from pathlib import Path
import pandas as pd
from ...load.checkpoint import load_checkpoint
from ...shared.assign_unique_ids import assign_unique_ids
from ...shared.constants import MANIFEST_FILENAME
from ...shared.standardize import standardize_label
from ...style_transfer import StylizerStack, batch_stylize
from ...transform.manifest import DatasetManifest
from ..base import BaseCommand, read_images

logger = logging.getLogger(__name__)


def image_paths(sources):
    paths = []
    for source in sources:
        source = Path(source)
        if source.is_dir() or source.suffix == ".csv":
            paths += read_images(source)[1]
        else:
            paths.append(source)
    return paths


class Command(BaseCommand):
    help = "multi-level whitening-coloring style transfer with a trained stylizer checkpoint"

    def add_arguments(self, parser):
        parser.add_argument("--stack", required=True, help="stylizer checkpoint written by train-ae")
        parser.add_argument("--content", nargs="+", required=True, help="content images or directories")
        parser.add_argument("--style", nargs="+", required=True, help="style images or directories")
        parser.add_argument("--alpha", type=float, default=None)
        parser.add_argument("--pairing", default=None, choices=["all_pairs", "zip"])
        parser.add_argument("--label", default="drusen", help="class the style images depict")

    def handle(self, options, config):
        networks, _ = load_checkpoint(options.stack)
        stack = StylizerStack.from_networks(
            networks,
            alpha=options.alpha if options.alpha is not None else config.get_float("stylize.alpha"),
            eps_reg=config.get_float("stylize.eps_reg"),
            eig_floor=config.get_float("stylize.eig_floor"),
        )
        out_dir = options.out / "images"
        df = batch_stylize(
            image_paths(options.content),
            image_paths(options.style),
            options.pairing or config.get_str("stylize.pairing"),
            stack,
            out_dir,
        )
        df.to_csv(options.out / "stylized.csv", index=False)

        rows = pd.DataFrame(
            {
                "path": [str(Path(path).relative_to(options.out)) for path in df["output_path"]],
                "label": standardize_label(options.label),
                "modality": "CFP" if stack.img_channels == 3 else "FA",
                "split": "",
                "provenance": "styletransfer",
            }
        )
        df = assign_unique_ids(rows, "path", "label", "modality", "provenance")
        DatasetManifest(df, root=options.out).to_csv(options.out / MANIFEST_FILENAME)
