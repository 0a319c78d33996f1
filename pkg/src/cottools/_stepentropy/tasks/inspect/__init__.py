# SPDX-License-Identifier: GPL-3.0-or-later
import sys

from .command import InspectTraces


def entry_point(cls=InspectTraces):
    """Define the CLI entrypoint for the ``inspect`` command."""
    sys.exit(cls().main())


def doc_parser():
    """Define the doc_parser for the ``inspect`` command."""
    return InspectTraces().parser
