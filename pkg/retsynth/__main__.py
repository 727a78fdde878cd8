import sys
from .cli import cli_dispatch

sys.exit(cli_dispatch())
