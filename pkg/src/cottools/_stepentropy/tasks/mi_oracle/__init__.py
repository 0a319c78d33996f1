# SPDX-License-Identifier: GPL-3.0-or-later
import sys

from .command import CheckMiBound


def entry_point(cls=CheckMiBound):
    """Define the CLI entrypoint for the ``mi-oracle`` command."""
    sys.exit(cls().main())


def doc_parser():
    """Define the doc_parser for the ``mi-oracle`` command."""
    return CheckMiBound().parser
