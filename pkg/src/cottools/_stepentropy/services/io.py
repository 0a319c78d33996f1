# SPDX-License-Identifier: GPL-3.0-or-later
import contextlib
import hashlib
import json
import logging
import sys
from argparse import ArgumentParser
from typing import Any, Dict, Iterator, Optional, TextIO

from ..utils import dump_line, file_digest, iter_records
from .base import Service

log = logging.getLogger("cottools.stepentropy")

PROVENANCE_SUFFIX = ".provenance.json"


class IoService(Service):
    """Stream line-delimited input and write outputs with their provenance sidecar."""

    def add_service_args(self, parser: ArgumentParser) -> None:
        """
        Add the input and output arguments.

        Args:
            parser (ArgumentParser)
                The parser to include the additional arguments.
        """
        super(IoService, self).add_service_args(parser)

        group = parser.add_argument_group("Input/Output")
        group.add_argument(
            "--in",
            dest="input",
            metavar="PATH",
            default=None,
            help="Line-delimited input file (standard input when omitted)",
        )
        group.add_argument(
            "--out",
            dest="output",
            metavar="PATH",
            default=None,
            help="Output file (standard output when omitted)",
        )

    @property
    def input_path(self) -> Optional[str]:
        """Return the input path, None for standard input."""
        path = self._service_args.input
        return None if path in (None, "-") else path

    @property
    def output_path(self) -> Optional[str]:
        """Return the output path, None for standard output."""
        path = self._service_args.output
        return None if path in (None, "-") else path

    def input_lines(self) -> Iterator[str]:
        """Yield the non-blank input lines, reading the file lazily."""
        if self.input_path is None:
            yield from iter_records(sys.stdin)
            return
        log.info("Reading %s", self.input_path)
        with open(self.input_path, "r", encoding="utf-8") as f:
            yield from iter_records(f)

    def input_digest(self, fallback: Optional[Dict[str, Any]] = None) -> str:
        """
        Return the SHA-256 of the input bytes.

        Args:
            fallback (dict, optional)
                Describes generated input; its canonical JSON is hashed when no
                input file was given.
        """
        if self.input_path is not None:
            return file_digest(self.input_path)
        payload = dump_line(fallback or {}, sort_keys=True).encode("utf-8")
        return hashlib.sha256(payload).hexdigest()

    @contextlib.contextmanager
    def open_output(self) -> Iterator[TextIO]:
        """Open the output file for writing, or hand out standard output."""
        if self.output_path is None:
            yield sys.stdout
            sys.stdout.flush()
            return
        with open(self.output_path, "w", encoding="utf-8") as f:
            yield f
        log.info("Wrote %s", self.output_path)

    def write_provenance(
        self, command: str, config_hash: str, input_digest: str, effective: Dict[str, Any]
    ) -> Optional[str]:
        """
        Write the ``<out>.provenance.json`` sidecar of the output file.

        When the output goes to standard output the provenance is logged instead.

        Returns:
            The sidecar path, if any.
        """
        document = {
            "command": command,
            "config_hash": config_hash,
            "input_digest": input_digest,
            "effective_config": effective,
        }
        if self.output_path is None:
            log.info("Provenance: %s", dump_line(document, sort_keys=True))
            return None
        path = self.output_path + PROVENANCE_SUFFIX
        with open(path, "w", encoding="utf-8") as f:
            json.dump(document, f, indent=2, sort_keys=True)
            f.write("\n")
        return path

    def record_provenance(self, command: str, generated: Optional[Dict[str, Any]] = None) -> None:
        """
        Write the provenance sidecar, or log the provenance for standard output.

        Expected to be mixed in with ConfigService.

        Args:
            command (str)
                The subcommand name.
            generated (dict, optional)
                Describes generated input when no input file was given.
        """
        config = self.cli_config  # type: ignore[attr-defined]
        path = self.write_provenance(
            command, config.config_hash, self.input_digest(generated), config.effective()
        )
        if path:
            log.debug("Wrote provenance %s", path)
