# SPDX-License-Identifier: GPL-3.0-or-later
import logging
import sys
from logging import Logger
from typing import Generator, Union

import pytest
from pytest import MonkeyPatch

from cottools._stepentropy.task import RUN_RESULT, StepEntropyTask


class MyTask(StepEntropyTask):
    def run(self) -> RUN_RESULT:
        return RUN_RESULT(True, False, {})


def simple_basic_config(level: Union[int, str], **_kwargs) -> None:
    """
    Define a similar config as logging.basicConfig with some differences.

    - it only sets the level, ignores other arguments
    - it works every time (instead of only once per process)
    """
    logging.getLogger().setLevel(level)


@pytest.fixture(autouse=True)
def clean_root_logger(monkeypatch: MonkeyPatch) -> Generator[None, None, None]:
    """Hijack logging.basicConfig and reset root logger level around tests."""
    monkeypatch.setattr(logging, "basicConfig", simple_basic_config)

    root = logging.getLogger()
    level = root.level
    yield
    root.setLevel(level)


def _reset(name: str) -> Generator[Logger, None, None]:
    # forced to NOTSET because other tests might have adjusted the level
    out = logging.getLogger(name)
    level = out.level
    out.setLevel(logging.NOTSET)
    yield out
    out.setLevel(level)


@pytest.fixture
def tier1_logger() -> Generator[Logger, None, None]:
    """Test the logger for this project."""
    yield from _reset("cottools.stepentropy")


@pytest.fixture
def tier2_logger() -> Generator[Logger, None, None]:
    """Test the logger of the HTTP stack used by the completions client."""
    yield from _reset("urllib3")


@pytest.fixture
def tier3_logger() -> Generator[Logger, None, None]:
    """Test a completely foreign logger from an unrelated project."""
    yield from _reset("some-foreign-logger")


@pytest.mark.parametrize(
    "argv, levels",
    [
        ([], (logging.INFO, logging.INFO, logging.INFO)),
        (["--debug"], (logging.DEBUG, logging.INFO, logging.INFO)),
        (["-dd"], (logging.DEBUG, logging.DEBUG, logging.INFO)),
        (["--debug", "-d", "--debug"], (logging.DEBUG, logging.DEBUG, logging.DEBUG)),
    ],
    ids=["default", "debug1", "debug2", "debug3"],
)
def test_log_levels(
    tier1_logger: Logger, tier2_logger: Logger, tier3_logger: Logger, argv, levels
) -> None:
    """Each --debug enables DEBUG logs from one more tier of loggers."""
    task = MyTask()
    sys.argv = ["my-task"] + argv
    task.main()

    assert (
        tier1_logger.getEffectiveLevel(),
        tier2_logger.getEffectiveLevel(),
        tier3_logger.getEffectiveLevel(),
    ) == levels
