"""class activation maps for a set of images"""

import logging
import numpy as np
import pandas as pd
from ...extract.codec import save_image
from ...shared.constants import CLASSES
from ...shared.standardize import standardize_label
from ...verify import cam_overlay, compute_cam
from ..base import BaseCommand, read_images
from .verify import load_classifier

logger = logging.getLogger(__name__)


class Command(BaseCommand):
    help = "write gray-scale class activation maps (and red overlays) for each image"

    def add_arguments(self, parser):
        parser.add_argument("--classifier", required=True, help="checkpoint written by train-classifier")
        parser.add_argument("--images", required=True, help="manifest, manifest directory or image directory")
        parser.add_argument("--class", dest="target", default=None, help="class to map; the predicted class when omitted")
        parser.add_argument("--max-images", type=int, default=None)

    def handle(self, options, config):
        classifier = load_classifier(options.classifier)
        images, paths = read_images(options.images)
        limit = options.max_images if options.max_images is not None else config.get_int("cam.max_images")
        images, paths = images[:limit], paths[:limit]
        overlay = config.get_bool("cam.overlay")
        if options.target is not None:
            target = [CLASSES.index(standardize_label(options.target))] * len(images)
        else:
            target = np.argmax(classifier.predict(images), axis=1).tolist()

        cam_dir = options.out / "cam"
        rows = []
        for image, path, class_idx in zip(images, paths, target):
            cam = compute_cam(classifier, image, class_idx, source_id=path.stem)
            save_image(cam.to_image(), cam_dir / f"{path.stem}_cam.pgm")
            if overlay:
                save_image(cam_overlay(image, cam), cam_dir / f"{path.stem}_overlay.ppm")
            row, col = cam.argmax
            rows.append(
                {"source": str(path), "class": CLASSES[class_idx], "row": row, "col": col, "quadrant": cam.quadrant()}
            )
        pd.DataFrame(rows).to_csv(options.out / "cam.csv", index=False)
        logger.info("wrote %s class activation maps to %s", len(rows), cam_dir)
