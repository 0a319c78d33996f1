# SPDX-License-Identifier: GPL-3.0-or-later
import sys

from .command import RunTokenBaseline


def entry_point(cls=RunTokenBaseline):
    """Define the CLI entrypoint for the ``token-baseline`` command."""
    sys.exit(cls().main())


def doc_parser():
    """Define the doc_parser for the ``token-baseline`` command."""
    return RunTokenBaseline().parser
