# SPDX-License-Identifier: GPL-3.0-or-later
import math

import attrs
import pytest

from cottools._stepentropy.backends import TaskFamilySpec, task_family
from cottools._stepentropy.experiments import DatasetConfig, build_dataset
from cottools._stepentropy.models import TokenRecord, TraceRecord
from cottools._stepentropy.pruner import PruneConfig
from cottools._stepentropy.segmenter import split_steps

from ..utils import make_trace


def test_token_limit_is_inclusive() -> None:
    traces = [
        make_trace([[0.0] * 4093], trace_id="fits"),
        make_trace([[0.0] * 4094], trace_id="too-long"),
        # pruning the long step brings this one under the limit
        make_trace([[0.0] * 4094, [1.0]], trace_id="pruned"),
    ]
    records, stats = build_dataset(traces, PruneConfig(kappa=0.5))
    records = list(records)

    assert [r["id"] for r in records] == ["fits", "pruned"]
    assert records[0]["compressed_tokens"] == 4096
    # "<think>" "[SKIP]" "\n\n" "s1t0" "</think>" answer
    assert records[1]["compressed_tokens"] == 6
    assert stats.to_dict()["filtered"] == 1
    assert stats.to_dict()["emitted"] == 2


def test_custom_limit() -> None:
    traces = [make_trace([[0.1], [0.2]], trace_id=str(i)) for i in range(3)]
    records, stats = build_dataset(traces, PruneConfig(kappa=0.0), max_tokens=5)
    assert list(records) == []
    assert stats.filtered == 3


def test_invalid_traces_are_skipped(caplog) -> None:
    plain = TraceRecord(
        id="plain",
        problem="p",
        raw_completion="no tags here",
        tokens=[TokenRecord(text="no tags here", entropy_bits=0.0)],
    )
    records, stats = build_dataset([plain, make_trace([[0.1]])], PruneConfig())

    assert stats.input == 0
    assert [r["id"] for r in records] == ["t1"]
    assert stats.to_dict() == {
        "input": 2,
        "emitted": 1,
        "filtered": 0,
        "skipped_invalid": 1,
        "mean_token_reduction": 0.0,
    }
    assert "Skipping trace plain" in caplog.text


def test_record_layout() -> None:
    records, _ = build_dataset([make_trace([[0.4], [0.1], [0.9]])], PruneConfig(kappa=0.34))
    (record,) = list(records)

    assert record == {
        "id": "t1",
        "problem": "What is 2 + 3?",
        "compressed_think": "s0t0\n\n[SKIP]\n\ns2t0",
        "inference_prompt": "What is 2 + 3?\n<think>\ns0t0\n\n[SKIP]\n\ns2t0\n</think>\n",
        "kappa": 0.34,
        "strategy": "low-entropy",
        "pruned_indices": [1],
        "token_reduction": 0.0,
        "compressed_tokens": 8,
        "ground_truth": "5",
    }


def test_family_reductions() -> None:
    count = 10000
    records, stats = build_dataset(task_family(TaskFamilySpec(count=count)), PruneConfig(kappa=0.5))

    reductions = []
    for record in records:
        n_steps = len(split_steps(record["compressed_think"]))
        k = len(record["pruned_indices"])
        # every pruned two-token step becomes a single marker
        assert record["token_reduction"] == pytest.approx(k / (2 * n_steps))
        reductions.append(record["token_reduction"])

    assert stats.emitted == count
    assert stats.filtered == stats.skipped_invalid == 0
    assert stats.mean_token_reduction == pytest.approx(math.fsum(reductions) / count)
    assert 0.2 < stats.mean_token_reduction < 0.25


def test_stats_do_not_grow_with_the_stream() -> None:
    traces = task_family(TaskFamilySpec(count=2000, seed=3))
    records, stats = build_dataset(traces, PruneConfig(kappa=0.3))

    reductions = [record["token_reduction"] for record in records]

    assert all(isinstance(value, (int, float)) for value in attrs.asdict(stats).values())
    assert stats.emitted == len(reductions) == 2000
    assert abs(stats.mean_token_reduction - math.fsum(reductions) / len(reductions)) < 1e-12


def test_dataset_config() -> None:
    assert DatasetConfig().max_tokens == 4096
    with pytest.raises(ValueError):
        DatasetConfig(max_tokens=0)
