# SPDX-License-Identifier: GPL-3.0-or-later
import sys

from .command import PruneTraces


def entry_point(cls=PruneTraces):
    """Define the CLI entrypoint for the ``prune`` command."""
    sys.exit(cls().main())


def doc_parser():
    """Define the doc_parser for the ``prune`` command."""
    return PruneTraces().parser
