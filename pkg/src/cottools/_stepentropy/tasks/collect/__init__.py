# SPDX-License-Identifier: GPL-3.0-or-later
import sys

from .command import CollectTraces


def entry_point(cls=CollectTraces):
    """Define the CLI entrypoint for the ``collect`` command."""
    sys.exit(cls().main())


def doc_parser():
    """Define the doc_parser for the ``collect`` command."""
    return CollectTraces().parser
