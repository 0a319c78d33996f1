# SPDX-License-Identifier: GPL-3.0-or-later
import sys
from unittest.mock import patch

import pytest
from _pytest.capture import CaptureFixture

from cottools._stepentropy.errors import AuthError, MissingThinkTags, RangeError
from cottools._stepentropy.task import RUN_RESULT, StepEntropyTask

step = StepEntropyTask.step


class TestStepEntropyTask(StepEntropyTask):
    __test__ = False

    @step("task1")
    def task1(self) -> None:
        print("task1")

    @step("task2")
    def task2(self) -> None:
        print("task2")

    def run(self) -> RUN_RESULT:
        self.task1()
        self.task2()
        return RUN_RESULT(True, False, {})


class RaisingTask(StepEntropyTask):
    def __init__(self, error: BaseException):
        super(RaisingTask, self).__init__([])
        self.error = error

    def run(self) -> RUN_RESULT:
        raise self.error


def test_skip(capsys: CaptureFixture) -> None:
    """Test that a method using step decorator is skipped when its name is provided with --skip."""
    task = TestStepEntropyTask()
    arg = ["", "--skip", "task1"]
    with patch.object(sys, "argv", arg):
        assert task.main() == 0

    out, _ = capsys.readouterr()
    assert "task2" in out
    assert "task1" not in out


def test_explicit_argv_wins(capsys: CaptureFixture) -> None:
    task = TestStepEntropyTask(["--skip", "task2"])
    with patch.object(sys, "argv", ["", "--skip", "task1"]):
        task.main()

    out, _ = capsys.readouterr()
    assert "task1" in out
    assert "task2" not in out


def test_task_run() -> None:
    """Exit with error if run() is not implemented."""
    task = StepEntropyTask()
    with pytest.raises(NotImplementedError):
        task.run()


def test_main() -> None:
    """Test the main entrypoint with contextmanager."""
    task = StepEntropyTask()
    arg = ["", "-d", "-d", "-d", "-d"]
    with patch.object(sys, "argv", arg):
        with patch("cottools._stepentropy.task.StepEntropyTask.run"):
            assert task.main() == 0


@pytest.mark.parametrize(
    "error, code",
    [
        (ValueError("bad value"), 1),
        (MissingThinkTags("Trace t1: no <think>...</think> pair"), 1),
        (RangeError("Span 0:4 exceeds 3 tokens"), 1),
        (AuthError("rejected"), 2),
    ],
)
def test_exit_codes(error: BaseException, code: int, caplog) -> None:
    assert RaisingTask(error).main() == code
    assert str(error) in caplog.text


def test_unsuccessful_run() -> None:
    with patch("cottools._stepentropy.task.StepEntropyTask.run") as run:
        run.return_value = RUN_RESULT(False, False, {})
        assert StepEntropyTask([]).main() == 1


def test_usage_error() -> None:
    with pytest.raises(SystemExit) as exc_info:
        StepEntropyTask(["--no-such-flag"]).args
    assert exc_info.value.code == 64


def test_description():
    """The description is initialized from subclass docstring, de-dented."""

    class MyTask(StepEntropyTask):
        """This is an example task subclass.

        It has a realistic multi-line doc string:

            ...and may have several levels of indent.
        """

    assert MyTask().description == (
        "This is an example task subclass.\n\n"
        "It has a realistic multi-line doc string:\n\n"
        "    ...and may have several levels of indent."
    )
