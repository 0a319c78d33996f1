# SPDX-License-Identifier: GPL-3.0-or-later
import logging
import threading
from argparse import ArgumentParser
from collections import defaultdict
from typing import Any, Dict, Optional

from ..arguments import ConfigFileLoad, from_environ, optional_int
from ..config import CliConfig
from .base import Service

log = logging.getLogger("cottools.stepentropy")


class ConfigService(Service):
    """
    Provide the effective configuration of a command.

    Values come from the ``--config`` YAML file, then from the flags of every
    mixed-in service; defaults fill the rest.
    """

    def __init__(self, *args, **kwargs) -> None:
        """Instantiate a ConfigService object."""
        self._cli_config: Optional[CliConfig] = None
        self._config_lock = threading.Lock()
        super(ConfigService, self).__init__(*args, **kwargs)

    def add_service_args(self, parser: ArgumentParser) -> None:
        """
        Add the configuration file and worker pool arguments.

        Args:
            parser (ArgumentParser)
                The parser to include the additional arguments.
        """
        super(ConfigService, self).add_service_args(parser)

        group = parser.add_argument_group("Configuration")
        group.add_argument(
            "--config",
            metavar="PATH",
            action=ConfigFileLoad,
            default={},
            help="YAML file with prune, reward, backend, sweep and dataset sections",
        )
        group.add_argument(
            "--jobs",
            metavar="UINT",
            type=from_environ("STEPENTROPY_JOBS", optional_int),
            default="",
            help="Worker pool size (or set STEPENTROPY_JOBS); defaults to the CPU count",
        )

    @property
    def jobs(self) -> Optional[int]:
        """Return the requested worker count, or None for the default."""
        return self._service_args.jobs or None

    @property
    def cli_config(self) -> CliConfig:
        """Return the effective configuration, built once."""
        with self._config_lock:
            if self._cli_config is None:
                overrides: Dict[str, Dict[str, Any]] = defaultdict(dict)
                self.collect_overrides(overrides)
                self._cli_config = CliConfig.load(self._service_args.config, overrides)
                log.debug("Effective configuration: %s", self._cli_config.effective())
        return self._cli_config
