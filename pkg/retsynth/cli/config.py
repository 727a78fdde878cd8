"""
Run configuration: documented defaults plus user overrides.

Defaults live in hand/defaults.yaml. A user file is either INI-style lines

    # comment
    gan.steps = 2000
    split.ratios = [0.8, 0.1, 0.1]

whose values are parsed with yaml.safe_load, or a .yaml file with the same
nested layout as the defaults. Unknown keys are errors.
"""

import logging
from pathlib import Path
import yaml
from ..shared.constants import HAND_DIR
from ..shared.errors import ConfigurationError
from ..shared.utils import load_yaml

logger = logging.getLogger(__name__)

DEFAULTS_FILE = HAND_DIR / "defaults.yaml"


def flatten(nested, prefix=""):
    """{"gan": {"steps": 1}} -> {"gan.steps": 1}"""
    flat = {}
    for key, value in nested.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            flat.update(flatten(value, f"{name}."))
        else:
            flat[name] = value
    return flat


def parse_ini_lines(text, source="<config>"):
    """section.key = value lines; blank lines and # comments are skipped"""
    values = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigurationError(f"{source}:{number}: expected 'section.key = value', got '{raw}'")
        key, value = (part.strip() for part in line.split("=", 1))
        try:
            values[key] = yaml.safe_load(value) if value else None
        except yaml.YAMLError as exc:
            raise ConfigurationError(f"{source}:{number}: cannot parse value '{value}'") from exc
    return values


class RunConfig:
    """flat section.key values with typed accessors"""

    def __init__(self, overrides=None, defaults=None):
        self.defaults = flatten(load_yaml(DEFAULTS_FILE)) if defaults is None else dict(defaults)
        self.values = dict(self.defaults)
        self.update(overrides or {})

    @classmethod
    def from_file(cls, path=None):
        """defaults overridden by a user file (INI-style or nested yaml)"""
        if path is None:
            return cls()
        path = Path(path)
        if not path.exists():
            raise ConfigurationError(f"config file {path} does not exist")
        if path.suffix in (".yaml", ".yml"):
            try:
                nested = load_yaml(path)
            except (ValueError, yaml.YAMLError) as exc:
                raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
            overrides = flatten(nested)
        else:
            overrides = parse_ini_lines(path.read_text(encoding="utf-8"), str(path))
        logger.info("config overrides from %s: %s", path, overrides)
        return cls(overrides)

    def update(self, overrides):
        unknown = sorted(set(overrides) - set(self.defaults))
        if unknown:
            raise ConfigurationError(f"unknown config keys {unknown}")
        self.values.update(overrides)
        return self

    def __contains__(self, key):
        return key in self.values

    def _get(self, key):
        if key not in self.values:
            raise ConfigurationError(f"unknown config key '{key}'")
        return self.values[key]

    def get_int(self, key):
        value = self._get(key)
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigurationError(f"{key} must be an integer, got {value!r}")
        return value

    def get_float(self, key):
        value = self._get(key)
        if isinstance(value, str):
            # yaml reads 1e-5 (no dot) as a string
            try:
                value = float(value)
            except ValueError as exc:
                raise ConfigurationError(f"{key} must be a number, got {value!r}") from exc
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigurationError(f"{key} must be a number, got {value!r}")
        return float(value)

    def get_str(self, key):
        value = self._get(key)
        if value is None:
            return None
        if not isinstance(value, str):
            raise ConfigurationError(f"{key} must be a string, got {value!r}")
        return value

    def get_bool(self, key):
        value = self._get(key)
        if not isinstance(value, bool):
            raise ConfigurationError(f"{key} must be true or false, got {value!r}")
        return value

    def get_list(self, key):
        value = self._get(key)
        if not isinstance(value, list):
            raise ConfigurationError(f"{key} must be a list, got {value!r}")
        return list(value)

    def section(self, name):
        """values of one section with the prefix removed"""
        prefix = f"{name}."
        return {key[len(prefix) :]: value for key, value in self.values.items() if key.startswith(prefix)}

    def nested(self):
        nested = {}
        for key, value in self.values.items():
            section, _, name = key.partition(".")
            nested.setdefault(section, {})[name] = value
        return nested

    def echo(self, out_dir):
        """writes the resolved config to <out_dir>/config.yaml"""
        path = Path(out_dir) / "config.yaml"
        with open(path, "w", encoding="utf-8") as file:
            yaml.safe_dump(self.nested(), file, sort_keys=True)
        return path
