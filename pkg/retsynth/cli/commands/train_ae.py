"""trains the four encoder/decoder pairs of the stylizer"""

import logging
import pandas as pd
from ...load.checkpoint import save_checkpoint
from ...networks import build_decoder, build_encoder
from ...style_transfer import LEVEL_ORDER, StylizerStack
from ...training import train_autoencoder
from ..base import BaseCommand, read_images

logger = logging.getLogger(__name__)


class Command(BaseCommand):
    help = "train reconstruction autoencoders for levels 1-4 and save them as one stylizer checkpoint"

    def add_arguments(self, parser):
        parser.add_argument("--images", required=True, help="manifest, manifest directory or image directory")
        parser.add_argument("--split", default=None, help="train on one split of a manifest")
        parser.add_argument("--steps", type=int, default=None)

    def handle(self, options, config):
        images, _ = read_images(options.images, split=options.split)
        steps = options.steps if options.steps is not None else config.get_int("autoencoder.steps")
        channels = images.shape[1]

        encoders, decoders, losses, psnrs = {}, {}, {}, []
        for level in sorted(LEVEL_ORDER):
            encoder = build_encoder(level, channels, config.get_int("autoencoder.img_size"), seed=options.seed + level)
            decoder = build_decoder(level, channels, config.get_int("autoencoder.img_size"), seed=options.seed + level)
            report = train_autoencoder(
                encoder,
                decoder,
                images,
                steps,
                lr=config.get_float("autoencoder.lr"),
                batch_size=config.get_int("autoencoder.batch_size"),
                seed=options.seed + level,
            )
            encoders[level], decoders[level] = encoder, decoder
            losses[f"level_{level}"] = report.series["loss"]
            psnrs.append({"level": level, "psnr": report.extra["psnr"]})

        stack = StylizerStack(encoders, decoders)
        save_checkpoint(stack.networks(), {"step": steps, "seed": options.seed}, options.out / "stylizer.bin")
        df = pd.DataFrame(losses)
        df.insert(0, "step", range(len(df)))
        df.to_csv(options.out / "train_ae.csv", index=False)
        pd.DataFrame(psnrs).to_csv(options.out / "autoencoder_psnr.csv", index=False)
