# SPDX-License-Identifier: GPL-3.0-or-later
import logging
import textwrap
import traceback
from argparse import Namespace, RawDescriptionHelpFormatter
from collections import namedtuple
from typing import List, Optional, Sequence

from .arguments import UsageErrorParser
from .errors import BackendError, RangeError
from .step import StepDecorator

LOG = logging.getLogger("cottools.stepentropy")
LOG_FORMAT = "%(asctime)s [%(levelname)-8s] %(message)s"

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_BACKEND = 2

RUN_RESULT = namedtuple("RUN_RESULT", ["success", "skipped", "output"])


class StepEntropyTask(object):
    """
    Base class for the step entropy CLI tasks.

    This class provides a CLI parser configured with minimal options which can be
    extended by subclasses and the Service mix-ins they inherit.
    """

    prog: Optional[str] = None
    """Program name shown in usage lines; derived from ``sys.argv`` when None."""

    def __init__(self, argv: Optional[Sequence[str]] = None) -> None:
        """
        Instantiate the task.

        Args:
            argv (list, optional)
                The arguments to parse; ``sys.argv`` is used when omitted.
        """
        super(StepEntropyTask, self).__init__()

        self._argv: Optional[List[str]] = list(argv) if argv is not None else None
        self._args: Optional[Namespace] = None

        self.parser = UsageErrorParser(
            prog=self.prog,
            description=self.description,
            formatter_class=RawDescriptionHelpFormatter,
        )
        self._basic_args()
        self.add_args()

    @property
    def description(self) -> str:
        """
        Define the description for argument parser; shows up in generated docs.

        Defaults to the class doc string with some whitespace fixes.
        """
        # Doc strings are typically written having the first line starting
        # without whitespace, and all other lines starting with whitespace.
        # That would be formatted oddly when copied into RST verbatim,
        # so we'll dedent all lines *except* the first.
        split = (self.__doc__ or "<undocumented task>").splitlines(True)
        firstline = split[0]
        rest = "".join(split[1:])
        rest = textwrap.dedent(rest)
        out = "".join([firstline, rest]).strip()

        # RawDescriptionHelpFormatter keeps paragraphs, so wrap them here.
        paragraphs = out.split("\n\n")
        chunks = ["\n".join(textwrap.wrap(p)) for p in paragraphs]
        return "\n\n".join(chunks)

    @property
    def args(self) -> Namespace:
        """
        Store the parsed args from the cli.

        returns the args if available from previous parse
        else parses with defined options and return the args.
        """
        if not self._args:
            self._args = self.parser.parse_args(self._argv)
        return self._args

    @classmethod
    def step(cls, name: str) -> StepDecorator:
        """
        Implement a decorator to mark an instance method as a discrete workflow step.

        Marking a method as a step has effects:

        - Log messages will be produced when entering and leaving the method
        - The method can be skipped if requested by the caller (via --skip argument)

        Steps may be written as plain blocking functions or as generators.

        When generators are used, the following semantics apply:

        - The step is considered *started* once the input generator has yielded at least
          one item, or has completed; or, immediately if the input is not a generator.
        - The step is considered *failed* if it raised an exception.
        - The step is considered *finished* once all items have been yielded.
        """
        return StepDecorator(name)

    def _basic_args(self) -> None:
        # minimum args required for every task
        self.parser.add_argument(
            "--debug",
            "-d",
            action="count",
            default=0,
            help=("Show debug logs; can be provided up to three times to enable more logs"),
        )
        self.parser.add_argument(
            "--skip",
            metavar="STAGES",
            default="",
            help="Comma-separated names of stages to skip",
        )

    def _setup_logging(self) -> None:
        logging.basicConfig(level=logging.INFO, format=LOG_FORMAT)  # NOSONAR

        # All loggers will now log at INFO or higher.
        # If we were given --debug, enable DEBUG level from some loggers,
        # depending on how many were given.
        debug_loggers: List[Optional[str]] = []
        if self.args.debug >= 1:
            # debug level 1: enable DEBUG from this project
            debug_loggers.append("cottools.stepentropy")
        if self.args.debug >= 2:
            # debug level 2: enable DEBUG from the HTTP and executor stack
            debug_loggers.extend(["more_executors", "urllib3"])
        if self.args.debug >= 3:
            # debug level 3: enable DEBUG from root logger
            # (potentially very, very verbose!)
            debug_loggers.append(None)

        for logger_name in debug_loggers:
            logging.getLogger(logger_name).setLevel(logging.DEBUG)

    def add_args(self) -> None:
        """
        Add parser options/arguments for a task.

        e.g. self.parser.add_argument("option", help="help text")
        """
        # Calling super add_args if it exists allows this class and
        # Service classes to be inherited in either order without breaking.
        from_super = getattr(super(StepEntropyTask, self), "add_args", lambda: None)
        from_super()

    def run(self) -> RUN_RESULT:
        """Implement a specific task."""
        raise NotImplementedError()

    def main(self) -> int:
        """
        Define the main method to be called by the entrypoint of the task.

        Returns:
            0 on success, 1 on validation errors or an unsuccessful run, 2 on
            backend failures. Usage errors exit with 64 while parsing.
        """
        self._setup_logging()

        try:
            res = self.run()
        except (ValueError, RangeError) as exc:
            LOG.error("%s", exc)
            return EXIT_VALIDATION
        except BackendError as exc:
            LOG.error("%s", exc)
            return EXIT_BACKEND
        except:  # noqa: E722
            traceback.print_exc()
            raise
        return EXIT_OK if res.success else EXIT_VALIDATION
