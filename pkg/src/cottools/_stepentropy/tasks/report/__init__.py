# SPDX-License-Identifier: GPL-3.0-or-later
import sys

from .command import RenderReport


def entry_point(cls=RenderReport):
    """Define the CLI entrypoint for the ``report`` command."""
    sys.exit(cls().main())


def doc_parser():
    """Define the doc_parser for the ``report`` command."""
    return RenderReport().parser
