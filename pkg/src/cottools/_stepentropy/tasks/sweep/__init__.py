# SPDX-License-Identifier: GPL-3.0-or-later
import sys

from .command import RunSweep


def entry_point(cls=RunSweep):
    """Define the CLI entrypoint for the ``sweep`` command."""
    sys.exit(cls().main())


def doc_parser():
    """Define the doc_parser for the ``sweep`` command."""
    return RunSweep().parser
