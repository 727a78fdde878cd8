"""
Average-probability verification of real and synthetic images.

A row is the mean softmax probability of the true class over a set of images
of one provenance and class group; top-1 accuracy and the top-1 class
histogram are kept alongside.
"""

from dataclasses import dataclass, field
import logging
import numpy as np
import pandas as pd
from ..autodiff import softmax
from ..shared.constants import CLASS_DISPLAY, CLASSES, PROVENANCES
from ..shared.errors import ConfigurationError, ContractError, LabelError
from ..shared.standardize import standardize_label, standardize_provenance

logger = logging.getLogger(__name__)


def class_group(label, modality):
    """display name of a class and modality, e.g. Drusen-CFP"""
    return f"{CLASS_DISPLAY.get(label, label)}-{modality}"


def _classes_for(classifier, classes):
    classes = list(CLASSES if classes is None else classes)
    num_classes = classifier.spec.get("num_classes", len(classes))
    if num_classes != len(classes):
        raise LabelError(f"classifier has {num_classes} classes, vocabulary has {len(classes)}")
    return classes


def predict_proba(classifier, images):
    """N x K softmax probabilities"""
    images = np.asarray(images)
    if len(images) == 0:
        raise ConfigurationError("no images to classify")
    return softmax(classifier.predict(images))


@dataclass
class VerificationRow:
    source: str
    class_group: str
    value: float
    top1_accuracy: float
    count: int
    histogram: dict = field(default_factory=dict)
    mean_probs: dict = field(default_factory=dict)


def verify_images(classifier, images, true_class, provenance="real", modality="CFP", classes=None):
    """mean probability of the true class over the images

    Args:
        classifier (Network): trained classifier
        images (np.ndarray): N x C x H x W
        true_class (str | int): class name, alias or index
        provenance (str, optional): real, wgan, dcgan or styletransfer. Defaults to "real".
        modality (str, optional): names the class group. Defaults to "CFP".
        classes (list, optional): class vocabulary. Defaults to CLASSES.

    Raises:
        LabelError: true class unknown to the classifier
        ConfigurationError: no images

    Returns:
        VerificationRow: value, top-1 accuracy, count and top-1 histogram
    """
    classes = _classes_for(classifier, classes)
    label = standardize_label(true_class, classes)
    index = classes.index(label)
    probs = predict_proba(classifier, images)
    top1 = np.argmax(probs, axis=1)
    counts = np.bincount(top1, minlength=len(classes))
    row = VerificationRow(
        source=standardize_provenance(provenance),
        class_group=class_group(label, modality),
        value=float(probs[:, index].mean()),
        top1_accuracy=float(np.mean(top1 == index)),
        count=len(probs),
        histogram={name: int(count) for name, count in zip(classes, counts)},
        mean_probs={name: float(value) for name, value in zip(classes, probs.mean(axis=0))},
    )
    logger.info(
        "verified %s %s images: mean p(%s) = %.3f, top-1 %.3f",
        row.count,
        row.source,
        label,
        row.value,
        row.top1_accuracy,
    )
    return row


class VerificationTable:
    """rows keyed by (source, class_group)"""

    def __init__(self, rows=None):
        self.rows = []
        for row in rows or []:
            self.add(row)

    def add(self, row):
        if not 0.0 <= row.value <= 1.0:
            raise ContractError(f"verification value {row.value} outside [0, 1]")
        if row.count < 1:
            raise ContractError(f"verification cell {row.source}/{row.class_group} has no images")
        self.rows.append(row)
        return self

    def __len__(self):
        return len(self.rows)

    def to_frame(self):
        """one long row per cell"""
        return pd.DataFrame(
            [
                {
                    "source": row.source,
                    "class_group": row.class_group,
                    "value": row.value,
                    "top1_accuracy": row.top1_accuracy,
                    "count": row.count,
                }
                for row in self.rows
            ],
            columns=["source", "class_group", "value", "top1_accuracy", "count"],
        )

    def pivot(self, values="value"):
        """sources as rows (real, wgan, dcgan, styletransfer order), class groups as columns"""
        df = self.to_frame()
        table = df.pivot_table(index="source", columns="class_group", values=values, aggfunc="mean")
        order = [source for source in PROVENANCES if source in table.index]
        return table.loc[order]


def relation_report(classifier, generated, top_n=5, classes=None):
    """classes ranked by mean probability over a generated set

    Ties keep ascending class index order.

    Raises:
        ConfigurationError: empty set or top_n < 1

    Returns:
        list[tuple[str, float]]: at most top_n (class, mean probability) pairs
    """
    if top_n < 1:
        raise ConfigurationError(f"top_n must be >= 1, got {top_n}")
    if len(generated) == 0:
        raise ConfigurationError("relation report needs a non-empty generated set")
    classes = _classes_for(classifier, classes)
    mean = predict_proba(classifier, generated).mean(axis=0)
    assert mean.sum() <= 1.0 + 1e-6, f"class probabilities sum to {mean.sum()}"
    order = sorted(range(len(classes)), key=lambda k: (-mean[k], k))
    return [(classes[k], float(mean[k])) for k in order[:top_n]]


def relation_frame(ranking):
    return pd.DataFrame(ranking, columns=["class", "mean_probability"]).assign(
        rank=lambda df: np.arange(1, len(df) + 1)
    )[["rank", "class", "mean_probability"]]
