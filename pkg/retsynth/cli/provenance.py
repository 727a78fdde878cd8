"""provenance record written at the end of every command"""

from datetime import datetime, timezone
import logging
from pathlib import Path
import yaml
from .. import __version__
from ..shared.utils import file_sha1

logger = logging.getLogger(__name__)

PROVENANCE_FILENAME = "provenance.yaml"
SKIPPED = {PROVENANCE_FILENAME}


def artifact_hashes(out_dir):
    """sha1 of every file under out_dir, keyed by relative path"""
    out_dir = Path(out_dir)
    return {
        str(path.relative_to(out_dir)): file_sha1(path)
        for path in sorted(out_dir.rglob("*"))
        if path.is_file() and path.name not in SKIPPED
    }


def write_provenance(out_dir, command, argv, seed, config_path=None, status="ok"):
    """writes <out_dir>/provenance.yaml with the command, seed, version and artifact hashes"""
    out_dir = Path(out_dir)
    record = {
        "command": command,
        "argv": list(argv),
        "seed": seed,
        "config": None if config_path is None else str(config_path),
        "version": __version__,
        "status": status,
        "finished": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "artifacts": artifact_hashes(out_dir),
    }
    path = out_dir / PROVENANCE_FILENAME
    with open(path, "w", encoding="utf-8") as file:
        yaml.safe_dump(record, file, sort_keys=False)
    logger.info("wrote provenance for %s artifacts to %s", len(record["artifacts"]), path)
    return path
