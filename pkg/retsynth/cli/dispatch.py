"""
Command-line entry point.

    python -m retsynth <command> [--config PATH] [--seed N] [--out DIR] ...

Exit codes: 0 success, 1 usage error, 2 runtime error. Each run logs to
<out>/<command>.log and ends by writing <out>/config.yaml and
<out>/provenance.yaml.
"""

import logging
import sys
from importlib import import_module
from ..shared.errors import RetsynthError, UsageError
from ..shared.utils import ensure_dir
from .config import RunConfig
from .provenance import write_provenance

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"

COMMANDS = {
    "synth-data": "synth_data",
    "split": "split",
    "merge": "merge",
    "train-ae": "train_ae",
    "train-gan": "train_gan",
    "train-wgan": "train_wgan",
    "train-classifier": "train_classifier",
    "generate": "generate",
    "stylize": "stylize",
    "verify": "verify",
    "cam": "cam",
    "sweep": "sweep",
    "report": "report",
}


def usage():
    lines = ["usage: python -m retsynth <command> [options]", "", "commands:"]
    lines += [f"  {name}" for name in COMMANDS]
    return "\n".join(lines)


def load_command(name):
    if name not in COMMANDS:
        raise UsageError(f"unknown command '{name}'\n{usage()}")
    return import_module(f".commands.{COMMANDS[name]}", __package__).Command()


def configure_logging(out_dir, name):
    """sends every record of the run to <out_dir>/<name>.log"""
    handler = logging.FileHandler(out_dir / f"{name}.log", mode="w", encoding="utf-8")
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    root = logging.getLogger()
    root.addHandler(handler)
    root.setLevel(logging.INFO)
    return handler


def release_logging(handler):
    logging.getLogger().removeHandler(handler)
    handler.close()


def cli_dispatch(argv=None):
    """parses argv, runs the command and returns the exit code"""
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        if argv and argv[0] in ("-h", "--help"):
            print(usage())
            return EXIT_OK
        if not argv:
            raise UsageError(usage())
        name = argv[0]
        command = load_command(name)
        options = command.create_parser(f"retsynth {name}").parse_args(argv[1:])
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:
        # --help
        return EXIT_OK if not exc.code else EXIT_USAGE

    try:
        out_dir = ensure_dir(options.out)
    except OSError as exc:
        print(f"retsynth {name}: cannot create {options.out}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    handler = configure_logging(out_dir, name)
    logger.info("running %s with %s", name, argv)
    status = "ok"
    try:
        config = RunConfig.from_file(options.config)
        config.echo(out_dir)
        command.handle(options, config)
    except (RetsynthError, OSError) as exc:
        logger.exception("%s failed", name)
        print(f"retsynth {name}: {exc}", file=sys.stderr)
        status = "failed"
    except Exception as exc:  # pylint: disable=broad-exception-caught
        logger.exception("%s failed with an unexpected %s", name, type(exc).__name__)
        print(f"retsynth {name}: unexpected {type(exc).__name__}: {exc}", file=sys.stderr)
        status = "failed"
    finally:
        write_provenance(out_dir, name, argv, options.seed, options.config, status)
        release_logging(handler)
    return EXIT_OK if status == "ok" else EXIT_RUNTIME
