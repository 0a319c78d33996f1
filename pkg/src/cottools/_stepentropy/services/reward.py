# SPDX-License-Identifier: GPL-3.0-or-later
from argparse import ArgumentParser
from typing import Any, Dict

from ..arguments import unsigned
from .base import Service


class RewardService(Service):
    """Expose the composite reward thresholds."""

    def add_service_args(self, parser: ArgumentParser) -> None:
        """
        Add the reward threshold arguments.

        Args:
            parser (ArgumentParser)
                The parser to include the additional arguments.
        """
        super(RewardService, self).add_service_args(parser)

        group = parser.add_argument_group("Reward")
        group.add_argument(
            "--tau-skip",
            metavar="UINT",
            type=unsigned,
            default=None,
            help="Skip markers above which the skip-count penalty applies (default: 100)",
        )
        group.add_argument(
            "--tau-length",
            metavar="UINT",
            type=unsigned,
            default=None,
            help="Response tokens above which the length penalty applies (default: 3500)",
        )

    def collect_overrides(self, overrides: Dict[str, Dict[str, Any]]) -> None:
        """Report the thresholds as ``reward`` section overrides."""
        super(RewardService, self).collect_overrides(overrides)
        overrides["reward"].update(
            tau_skip_num=self._service_args.tau_skip, tau_length=self._service_args.tau_length
        )
