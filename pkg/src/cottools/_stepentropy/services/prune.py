# SPDX-License-Identifier: GPL-3.0-or-later
from argparse import ArgumentParser
from typing import Any, Dict

from ..arguments import unsigned
from ..models import Strategy
from .base import Service


class PruneService(Service):
    """Expose the step pruning flags."""

    def add_service_args(self, parser: ArgumentParser) -> None:
        """
        Add the pruning arguments.

        Args:
            parser (ArgumentParser)
                The parser to include the additional arguments.
        """
        super(PruneService, self).add_service_args(parser)

        group = parser.add_argument_group("Pruning")
        group.add_argument(
            "--kappa",
            metavar="FLOAT",
            type=float,
            default=None,
            help="Fraction of steps to prune, within [0, 1] (default: 0.8)",
        )
        group.add_argument(
            "--strategy",
            type=Strategy.parse,
            default=None,
            help="Step selection: low-entropy, high-entropy or random (default: low-entropy)",
        )
        group.add_argument(
            "--seed",
            metavar="UINT",
            type=unsigned,
            default=None,
            help="Seed of the random strategy (default: 0)",
        )
        group.add_argument(
            "--skip-token",
            metavar="STR",
            default=None,
            help="Marker replacing each pruned step (default: [SKIP])",
        )

    def collect_overrides(self, overrides: Dict[str, Dict[str, Any]]) -> None:
        """Report the pruning flags as ``prune`` section overrides."""
        super(PruneService, self).collect_overrides(overrides)
        args = self._service_args
        overrides["prune"].update(
            kappa=args.kappa, strategy=args.strategy, seed=args.seed, skip_token=args.skip_token
        )
        if args.skip_token is not None:
            overrides["reward"]["skip_token"] = args.skip_token
