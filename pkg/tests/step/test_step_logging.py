# SPDX-License-Identifier: GPL-3.0-or-later
import logging
import sys
from argparse import Namespace
from typing import Generator, Iterable, NoReturn

import pytest
from _pytest.logging import LogCaptureFixture

from cottools._stepentropy.task import StepEntropyTask

step = StepEntropyTask.step


class SimulatedError(RuntimeError):
    pass


class FakePipeline:
    def __init__(self, skip: str = ""):
        self.args = Namespace(skip=skip)

    @step("Check kappa")
    def check_kappa(self, kappa: float) -> float:
        if not 0 <= kappa <= 1:
            raise SimulatedError()
        return kappa

    @step("Read traces")
    def read_traces(self, n: int) -> Generator[str, None, None]:
        for i in range(n):
            yield f"t{i}"

    @step("Prune traces")
    def prune_traces(self, ids: Iterable[str]) -> Generator[str, None, None]:
        for trace_id in ids:
            yield trace_id + "-pruned"
        yield "summary"

    @step("Maybe read")
    def maybe_read(self, value: bool = False, error: bool = False) -> Generator[bool, None, None]:
        if error:
            raise RuntimeError("whoops")
        if value:
            yield value

    @step("Exit with code")
    def exit_with_code(self, code: int) -> NoReturn:
        sys.exit(code)


@pytest.fixture(autouse=True)
def info_logs(caplog: LogCaptureFixture) -> None:
    caplog.set_level(logging.INFO)


def test_success(caplog: LogCaptureFixture) -> None:
    """Plain blocking step should log when entered/exited."""
    assert FakePipeline().check_kappa(0.5) == 0.5
    assert caplog.messages == ["Check kappa: started", "Check kappa: finished"]


def test_fail(caplog: LogCaptureFixture) -> None:
    """Plain blocking step should log when entered/failed."""
    with pytest.raises(SimulatedError):
        FakePipeline().check_kappa(1.5)

    assert caplog.messages == ["Check kappa: started", "Check kappa: failed"]


def test_events(caplog: LogCaptureFixture) -> None:
    """Every step log carries a machine readable event."""
    with pytest.raises(SimulatedError):
        FakePipeline().check_kappa(-1)

    assert [r.event for r in caplog.records] == [
        {"type": "check-kappa-start"},
        {"type": "check-kappa-error"},
    ]


def test_skip(caplog: LogCaptureFixture) -> None:
    """A skipped step is not run and hands its first argument through."""
    pipeline = FakePipeline(skip="check-kappa,prune-traces")

    assert pipeline.check_kappa(7.0) == 7.0
    assert list(pipeline.prune_traces(pipeline.read_traces(2))) == ["t0", "t1"]
    assert caplog.messages == [
        "Check kappa: skipped",
        "Read traces: started",
        "Prune traces: skipped",
        "Read traces: finished",
    ]
    assert caplog.records[0].event == {"type": "check-kappa-skip"}


def test_skip_needs_machine_name(caplog: LogCaptureFixture) -> None:
    FakePipeline(skip="Check kappa").check_kappa(0.1)
    assert caplog.messages == ["Check kappa: started", "Check kappa: finished"]


@pytest.mark.parametrize(
    "code, outcome", [(0, "finished"), (None, "failed"), (64, "failed")]
)
def test_exit(caplog: LogCaptureFixture, code, outcome: str) -> None:
    """Step exiting successfully is considered finished, otherwise failed."""
    with pytest.raises(SystemExit):
        FakePipeline().exit_with_code(code)

    assert caplog.messages == ["Exit with code: started", f"Exit with code: {outcome}"]


def test_generator_logging(caplog: LogCaptureFixture) -> None:
    """Chained generator steps log start/stop messages as items flow."""
    pipeline = FakePipeline()
    traces = pipeline.read_traces(3)

    # a step taking no generator starts when called
    assert caplog.messages == ["Read traces: started"]

    pruned = pipeline.prune_traces(traces)

    # the consuming step starts with its first input item
    assert caplog.messages == ["Read traces: started"]
    assert next(pruned) == "t0-pruned"
    assert caplog.messages == ["Read traces: started", "Prune traces: started"]

    assert [next(pruned), next(pruned), next(pruned)] == ["t1-pruned", "t2-pruned", "summary"]
    assert caplog.messages == [
        "Read traces: started",
        "Prune traces: started",
        "Read traces: finished",
    ]

    with pytest.raises(StopIteration):
        next(pruned)
    assert caplog.messages == [
        "Read traces: started",
        "Prune traces: started",
        "Read traces: finished",
        "Prune traces: finished",
    ]


def test_generator_noop(caplog: LogCaptureFixture) -> None:
    """A generator which returns without yielding anything logs appropriately."""
    pipeline = FakePipeline()
    out = pipeline.prune_traces(pipeline.maybe_read())

    assert caplog.messages == ["Maybe read: started"]
    assert next(out) == "summary"
    assert caplog.messages == [
        "Maybe read: started",
        "Maybe read: finished",
        "Prune traces: started",
    ]


def test_generator_failed(caplog: LogCaptureFixture) -> None:
    """A generator which raises an exception logs appropriately."""
    items = FakePipeline().maybe_read(error=True)
    assert caplog.messages == ["Maybe read: started"]

    with pytest.raises(RuntimeError):
        next(items)
    assert caplog.messages == ["Maybe read: started", "Maybe read: failed"]
