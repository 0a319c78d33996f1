# SPDX-License-Identifier: GPL-3.0-or-later
import logging
import threading
from argparse import ArgumentParser
from typing import Any, Dict, Optional

from ..arguments import unsigned
from ..backends import CompletionsClient, get_backend
from .base import Service

log = logging.getLogger("cottools.stepentropy")


class BackendService(Service):
    """
    Provide the OpenAI-compatible completions client.

    The client is created on first use with the effective ``backend`` section, so
    it is expected to be mixed in with ConfigService.
    """

    def __init__(self, *args, **kwargs) -> None:
        """Instantiate a BackendService object."""
        self._client: Optional[CompletionsClient] = None
        self._client_lock = threading.Lock()
        super(BackendService, self).__init__(*args, **kwargs)

    def add_service_args(self, parser: ArgumentParser) -> None:
        """
        Add the completions endpoint arguments.

        Args:
            parser (ArgumentParser)
                The parser to include the additional arguments.
        """
        super(BackendService, self).add_service_args(parser)

        group = parser.add_argument_group("Completions backend")
        group.add_argument(
            "--endpoint", metavar="URL", default=None, help="Base URL of the completions API"
        )
        group.add_argument("--model", metavar="STR", default=None, help="Model name to request")
        group.add_argument(
            "--api-key-env",
            metavar="NAME",
            default=None,
            help="Environment variable holding the API key (default: OPENAI_API_KEY)",
        )
        group.add_argument(
            "--max-tokens",
            metavar="UINT",
            type=unsigned,
            default=None,
            help="Generation budget per request (default: 4096)",
        )

    def collect_overrides(self, overrides: Dict[str, Dict[str, Any]]) -> None:
        """Report the endpoint flags, and --jobs as the in-flight cap, as ``backend`` overrides."""
        super(BackendService, self).collect_overrides(overrides)
        args = self._service_args
        overrides["backend"].update(
            endpoint_url=args.endpoint,
            model=args.model,
            api_key_env=args.api_key_env,
            max_tokens=args.max_tokens,
            max_in_flight=getattr(args, "jobs", None) or None,
        )

    @property
    def completions_client(self) -> CompletionsClient:
        """Return the completions client, creating it on first use."""
        with self._client_lock:
            if self._client is None:
                config = self.cli_config.backend  # type: ignore[attr-defined]
                log.debug("Using endpoint %s with model %s", config.endpoint_url, config.model)
                self._client = get_backend("completions", config)  # type: ignore[assignment]
        return self._client  # type: ignore[return-value]
