# SPDX-License-Identifier: GPL-3.0-or-later
import os
import sys
from argparse import Action, ArgumentError, ArgumentParser, ArgumentTypeError
from typing import Any, Callable, NoReturn, Optional, Tuple

import yaml

USAGE_EXIT_CODE = 64


class UsageErrorParser(ArgumentParser):
    """ArgumentParser reporting usage errors with the conventional exit code 64."""

    def error(self, message: str) -> NoReturn:
        """Print the usage and the error to the error stream, then exit with 64."""
        self.print_usage(sys.stderr)
        self.exit(USAGE_EXIT_CODE, f"{self.prog}: error: {message}\n")


def from_environ(key, delegate_converter=lambda x: x):
    """
    Define a converter for argparse "type" which supports reading values from the environment.

    Expected usage is like this:

      add_argument('--jobs', default='', type=from_environ('STEPENTROPY_JOBS', optional_int))

    The environment variable is resolved when arguments are parsed rather than when
    the parser is set up, and its value never shows up in ``--help``.

    Arguments:
        key (str)
            Name of environment variable to look up.
        delegate_converter (callable)
            A converter for the looked up environment variable.

    Returns:
        object
            The argument value looked up from environment & converted.
    """
    return FromEnvironmentConverter(key, delegate_converter)


class FromEnvironmentConverter(object):
    """Define the converter object to read values from environment."""

    def __init__(self, key: str, delegate: Callable[[str], Any]):
        """
        Instantiate the converter.

        Args:
            key (str)
                Name of environment variable to look up.
            delegate (callable)
                A converter for the looked up environment variable.
        """
        self.key = key
        self.delegate = delegate

    def __call__(self, value: Optional[str]) -> Any:
        """
        Execute the converter when called.

        Args:
            value (str)
                The value to be converted.
        Returns:
            The converted value.
        """
        if not value:
            value = os.environ.get(self.key) or ""
        return self.delegate(value)


def optional_int(value: str) -> Optional[int]:
    """Convert a non-negative integer argument, mapping the empty string to None."""
    if not value:
        return None
    try:
        out = int(value)
    except ValueError:
        raise ArgumentTypeError(f"invalid integer: {value!r}") from None
    if out < 0:
        raise ArgumentTypeError(f"expected a non-negative integer, got {value!r}")
    return out


def unsigned(value: str) -> int:
    """Convert a non-negative integer argument."""
    out = optional_int(value)
    if out is None:
        raise ArgumentTypeError("expected a non-negative integer")
    return out


def ratio_range(value: str) -> Tuple[float, ...]:
    """
    Expand a ``START:END:STEP`` argument into the ratios it covers, ends included.

    Values are rounded to ten decimals so that ``0.1:1.0:0.1`` yields exactly the
    ten ratios one would write by hand.
    """
    try:
        start, end, step = (float(part) for part in value.split(":"))
    except ValueError:
        raise ArgumentTypeError(f"expected START:END:STEP, got {value!r}") from None
    if step <= 0 or end < start:
        raise ArgumentTypeError(f"empty ratio range {value!r}")
    count = int((end - start) / step + 1e-9) + 1
    return tuple(round(start + i * step, 10) for i in range(count))


class SplitAndExtend(Action):
    """
    Argparse Action subclass for splitting string-type arguments.

    Similar to the built-in action ``"extend"``, which allows for multiple instances
    of an option to be present by accumulating each instance's values in to a
    flattened list, but each instance is further split on the ``split_on``
    delimiter (a comma by default).

    Examples:
        >>> parser = ArgumentParser()
        >>> _ = parser.add_argument("--strategies", action=SplitAndExtend, split_on=",")
        >>> parser.parse_args(["--strategies", "low,high", "--strategies", "random"])
        Namespace(strategies=['low', 'high', 'random'])

    Attributes:
        split_on (str): the delimiter on which to split a delimited list
            of values for a single instance of an option.
    """

    def __init__(self, *args, **kwargs):
        """Instantiate the SplitAndExtend action."""
        self.__split_on = kwargs.pop("split_on", ",")
        super(SplitAndExtend, self).__init__(*args, **kwargs)

    def __call__(self, _, namespace, values, options=None):
        """Execute the split and extend action."""
        items = getattr(namespace, self.dest, None) or []
        # values parsed with a non-string type are added as they are
        split = values.split(self.split_on) if isinstance(values, str) else values
        items.extend(item for item in split if item != "")
        setattr(namespace, self.dest, items)

    @property
    def split_on(self):
        """Return the split delimiter."""
        return self.__split_on


class ConfigFileLoad(Action):
    """
    Argparse Action subclass loading a YAML configuration file.

    The destination receives the parsed mapping; an empty file yields an empty
    mapping.
    """

    def __call__(self, parser, namespace, values, options=None):
        """Load the YAML file named by the argument."""
        try:
            with open(values, "r", encoding="utf-8") as f:
                data = yaml.safe_load(f)
        except OSError as exc:
            raise ArgumentError(self, f"cannot read {values}: {exc.strerror}") from None
        except yaml.YAMLError as exc:
            raise ArgumentError(self, f"invalid YAML in {values}: {exc}") from None
        if data is None:
            data = {}
        if not isinstance(data, dict):
            raise ArgumentError(self, f"Expected a mapping, got: {type(data)}")
        setattr(namespace, self.dest, data)
        setattr(namespace, self.dest + "_path", values)
