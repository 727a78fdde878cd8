"""
Labeled image sets with split assignment and provenance.

A manifest is a DataFrame with one row per image (image_id, path, label,
modality, split, provenance). Paths are relative to the manifest's root
directory unless absolute; the split is empty until split_dataset runs.
"""

import logging
from pathlib import Path
import numpy as np
import pandas as pd
from ..extract.codec import load_image
from ..shared.constants import CLASSES, MANIFEST_COLUMNS, MODALITIES, PROVENANCES, SPLITS
from ..shared.errors import ConfigurationError, ContractError, DimensionError, LabelError
from ..shared.standardize import standardize_manifest_columns

logger = logging.getLogger(__name__)


class DatasetManifest:
    """image rows, the directory their paths are relative to, the class vocabulary and split seed"""

    def __init__(self, df, root=".", classes=None, seed=None):
        missing = [column for column in MANIFEST_COLUMNS if column not in df.columns]
        if missing:
            raise ContractError(f"manifest is missing columns {missing}")
        self.df = df[MANIFEST_COLUMNS].reset_index(drop=True).copy()
        self.df["split"] = self.df["split"].fillna("").astype(str)
        self.root = Path(root)
        self.classes = list(CLASSES if classes is None else classes)
        self.seed = seed

    def __len__(self):
        return len(self.df)

    def __repr__(self):
        return f"DatasetManifest({len(self)} rows, root={self.root})"

    def copy(self, df=None):
        return DatasetManifest(self.df if df is None else df, self.root, self.classes, self.seed)

    @classmethod
    def from_csv(cls, path, root=None, classes=None):
        """reads a manifest; paths resolve against root (default: the csv's directory)"""
        path = Path(path)
        df = pd.read_csv(path, dtype=str, keep_default_na=False)
        df = standardize_manifest_columns(df)
        return cls(df, root=path.parent if root is None else root, classes=classes)

    def to_csv(self, path):
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.df.to_csv(path, index=False)
        logger.info("wrote %s manifest rows to %s", len(self), path)
        return path

    def resolve(self, path):
        path = Path(path)
        return path if path.is_absolute() else self.root / path

    def paths(self):
        return [self.resolve(path) for path in self.df["path"]]

    def subset(self, **filters):
        """rows whose columns equal the given values"""
        mask = np.ones(len(self.df), dtype=bool)
        for column, value in filters.items():
            mask &= (self.df[column] == value).to_numpy()
        return self.copy(self.df[mask])

    def label_indices(self):
        unknown = sorted(set(self.df["label"]) - set(self.classes))
        if unknown:
            raise LabelError(f"labels {unknown} are not in the class vocabulary {self.classes}")
        return self.df["label"].map(self.classes.index).to_numpy(dtype=np.int64)

    def validate(self, check_files=True, ratios=None):
        """checks vocabularies, split/ratio agreement and that every file decodes

        Args:
            check_files (bool, optional): decode every image. Defaults to True.
            ratios (tuple, optional): expected (train, val, test) fractions; per class
                counts must match within one item

        Raises:
            LabelError: unknown label, modality or provenance
            ContractError: bad split values, duplicate ids, ratio mismatch or a
                missing/undecodable file
        """
        self.label_indices()
        for column, allowed in (("modality", MODALITIES), ("provenance", PROVENANCES)):
            bad = sorted(set(self.df[column]) - set(allowed))
            if bad:
                raise LabelError(f"unknown {column} values {bad}, expected {allowed}")
        bad_splits = sorted(set(self.df["split"]) - set(SPLITS) - {""})
        if bad_splits:
            raise ContractError(f"unknown split values {bad_splits}")
        if self.df["image_id"].duplicated().any():
            raise ContractError("manifest image ids are not unique")

        if ratios is not None:
            for label, group in self.df.groupby("label"):
                for split, ratio in zip(SPLITS, ratios):
                    count = int((group["split"] == split).sum())
                    if abs(count - ratio * len(group)) > 1:
                        raise ContractError(
                            f"class {label}: {count} {split} items, expected about {ratio * len(group):.1f}"
                        )

        if check_files:
            for path in self.paths():
                if not path.exists():
                    raise ContractError(f"manifest references missing file {path}")
                load_image(path)
        return self

    def load_arrays(self, split=None, **filters):
        """decodes the selected rows

        Returns:
            tuple[np.ndarray, np.ndarray]: N x C x H x W float32 images and int64 class indices
        """
        selected = self if split is None else self.subset(split=split)
        if filters:
            selected = selected.subset(**filters)
        labels = selected.label_indices()
        if len(selected) == 0:
            return np.empty((0,), dtype=np.float32), labels
        images = [load_image(path) for path in selected.paths()]
        shapes = {image.shape for image in images}
        if len(shapes) > 1:
            raise DimensionError(f"images of mixed shapes {sorted(shapes)}; filter by modality")
        return np.stack(images), labels

    def rebase(self, root):
        """the same rows with paths relative to a new root when possible, absolute otherwise"""
        root = Path(root)
        anchor = root.resolve()
        rewritten = []
        for path in self.paths():
            absolute = path.resolve()
            try:
                rewritten.append(str(absolute.relative_to(anchor)))
            except ValueError:
                rewritten.append(str(absolute))
        df = self.df.copy()
        df["path"] = rewritten
        return DatasetManifest(df, root, self.classes, self.seed)

    def merge(self, other, split="train"):
        """appends another manifest's rows, all assigned to `split`

        Paths of the other manifest are rewritten relative to this root when
        possible, absolute otherwise.
        """
        if split not in SPLITS:
            raise ConfigurationError(f"split must be one of {SPLITS}, got {split}")
        added = other.rebase(self.root).df
        added["split"] = split
        merged = pd.concat([self.df, added], ignore_index=True)
        if merged["image_id"].duplicated().any():
            raise ContractError("merged manifests share image ids")
        logger.info("merged %s %s rows into the %s split", len(added), "/".join(added["provenance"].unique()), split)
        return self.copy(merged)

    def counts(self):
        """rows per (label, split)"""
        return self.df.groupby(["label", "split"]).size().rename("n").reset_index()
