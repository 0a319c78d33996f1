# SPDX-License-Identifier: GPL-3.0-or-later
import sys

from .command import ScoreCompletions


def entry_point(cls=ScoreCompletions):
    """Define the CLI entrypoint for the ``reward`` command."""
    sys.exit(cls().main())


def doc_parser():
    """Define the doc_parser for the ``reward`` command."""
    return ScoreCompletions().parser
