"""contains functions for standardizing labels and modalities that arrive from users or files"""

import numbers
from .constants import CLASSES, HAND_DIR, MODALITIES, PROVENANCES
from .errors import LabelError
from .utils import load_yaml, replace_vals_from_yaml

LABEL_ALIASES = HAND_DIR / "label.yaml"
MODALITY_ALIASES = HAND_DIR / "modality.yaml"


def standardize_label(label, classes=None):
    """maps a user-facing label ("GA", "Geographic atrophy", 1) to its canonical class name

    Args:
        label (str | int): label name, alias or class index
        classes (list, optional): class vocabulary. Defaults to CLASSES.

    Raises:
        LabelError: if the label is unknown

    Returns:
        str: canonical class name
    """
    classes = CLASSES if classes is None else list(classes)
    if isinstance(label, numbers.Integral) and not isinstance(label, bool):
        if 0 <= label < len(classes):
            return classes[label]
        raise LabelError(f"class index {label} out of range for {len(classes)} classes")

    key = str(label).strip()
    if key.isdigit():
        return standardize_label(int(key), classes)

    aliases = load_yaml(LABEL_ALIASES)
    name = aliases.get(key, aliases.get(key.lower(), key.lower()))
    if name not in classes:
        raise LabelError(f"unknown label '{label}'. Known classes are: {', '.join(classes)}")
    return name


def standardize_modality(modality):
    """maps modality spellings ("cfp", "color", "fa") to CFP or FA"""
    aliases = load_yaml(MODALITY_ALIASES)
    key = str(modality).strip()
    name = aliases.get(key, aliases.get(key.lower(), key.upper()))
    if name not in MODALITIES:
        raise LabelError(f"unknown modality '{modality}'. Known modalities are: {MODALITIES}")
    return name


def standardize_provenance(provenance):
    """lower-cases and checks a provenance value"""
    name = str(provenance).strip().lower().replace("-", "").replace("_", "")
    if name == "style":
        name = "styletransfer"
    if name not in PROVENANCES:
        raise LabelError(f"unknown provenance '{provenance}'. Known values are: {PROVENANCES}")
    return name


def standardize_manifest_columns(df):
    """replaces label and modality aliases in a manifest dataframe using hand/ yaml files"""
    for yaml_filename in (LABEL_ALIASES, MODALITY_ALIASES):
        df = replace_vals_from_yaml(df, yaml_filename)
    return df
