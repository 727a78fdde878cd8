"""html report over the outputs of earlier runs"""

import logging
from ...report import Report
from ..base import BaseCommand

logger = logging.getLogger(__name__)


class Command(BaseCommand):
    help = "collect verification, sweep, relation, loss and image outputs into report.html"

    def add_arguments(self, parser):
        parser.add_argument("--inputs", nargs="+", required=True, help="output directories of earlier commands")
        parser.add_argument("--title", default=None)

    def handle(self, options, config):
        with Report(
            options.inputs,
            options.out,
            title=options.title or config.get_str("report.title"),
            max_images=config.get_int("report.max_images"),
        ) as report:
            report.build_html_report()
