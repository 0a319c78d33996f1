# SPDX-License-Identifier: GPL-3.0-or-later
import sys

from .command import BuildDataset


def entry_point(cls=BuildDataset):
    """Define the CLI entrypoint for the ``build-dataset`` command."""
    sys.exit(cls().main())


def doc_parser():
    """Define the doc_parser for the ``build-dataset`` command."""
    return BuildDataset().parser
