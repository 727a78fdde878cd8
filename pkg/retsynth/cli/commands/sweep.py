"""verification value against the number of images the generator was trained on"""

import logging
from ...verify import sample_size_sweep, wgan_trainer
from ..base import BaseCommand, modality_for, read_images
from .train_wgan import wgan_config
from .verify import load_classifier

logger = logging.getLogger(__name__)


class Command(BaseCommand):
    help = "train one WGAN per subset size and verify its samples"

    def add_arguments(self, parser):
        parser.add_argument("--classifier", required=True, help="checkpoint written by train-classifier")
        parser.add_argument("--images", required=True, help="real images of the true class")
        parser.add_argument("--true-class", required=True)
        parser.add_argument("--label", default=None, help="select one class of a manifest")
        parser.add_argument("--sizes", type=int, nargs="+", default=None)

    def handle(self, options, config):
        classifier = load_classifier(options.classifier)
        images, _ = read_images(options.images, label=options.label)
        sizes = options.sizes or [int(size) for size in config.get_list("sweep.sizes")]
        cfg = wgan_config(config, options.seed, steps=config.get_int("sweep.steps"))
        curve = sample_size_sweep(
            sizes,
            images,
            wgan_trainer(cfg, base_ch=config.get_int("sweep.base_ch")),
            classifier,
            seed=options.seed,
            true_class=options.true_class,
            n_generate=config.get_int("sweep.n_generate"),
            modality=modality_for(images),
        )
        curve.to_csv(options.out / "sweep.csv", index=False)
