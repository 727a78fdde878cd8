"""command-line dispatch, run configuration and provenance records"""

from .config import RunConfig, flatten, parse_ini_lines
from .dispatch import COMMANDS, EXIT_OK, EXIT_RUNTIME, EXIT_USAGE, cli_dispatch
from .provenance import artifact_hashes, write_provenance

__all__ = [
    "COMMANDS",
    "EXIT_OK",
    "EXIT_RUNTIME",
    "EXIT_USAGE",
    "RunConfig",
    "artifact_hashes",
    "cli_dispatch",
    "flatten",
    "parse_ini_lines",
    "write_provenance",
]
