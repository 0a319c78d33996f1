# SPDX-License-Identifier: GPL-3.0-or-later
import json

from cottools._stepentropy.models import TokenRecord, TraceRecord, serialize_trace
from cottools._stepentropy.tasks.build_dataset import BuildDataset, entry_point

from ..command import CommandTester
from ..utils import make_trace


def test_build_dataset(command_tester: CommandTester, tmpdir) -> None:
    """Long records are filtered, traces without think tags are skipped."""
    plain = TraceRecord(
        id="plain",
        problem="p",
        raw_completion="no tags here",
        tokens=[TokenRecord(text="no tags here", entropy_bits=0.0)],
    )
    path = tmpdir.join("traces.jsonl")
    path.write(
        "\n".join(
            [
                serialize_trace(make_trace([[0.1], [0.9], [0.2]], trace_id="short")),
                serialize_trace(plain),
                serialize_trace(make_trace([[0.5] * 6, [0.1]], trace_id="long")),
            ]
        )
        + "\n"
    )
    out = str(tmpdir.join("dataset.jsonl"))

    code = command_tester.test(
        lambda: entry_point(BuildDataset),
        [
            "test-build-dataset",
            "--in",
            str(path),
            "--out",
            out,
            "--kappa",
            "0.5",
            "--max-tokens",
            "8",
        ],
        compare_extra={"dataset.jsonl": {"filename": out}},
    )
    assert code == 0

    with open(out) as f:
        records = [json.loads(line) for line in f]
    assert [r["id"] for r in records] == ["short"]
    assert records[0]["compressed_tokens"] == 8
    assert records[0]["inference_prompt"] == (
        "What is 2 + 3?\n<think>\n[SKIP]\n\ns1t0\n\ns2t0\n</think>\n"
    )

    with open(out + ".stats.json") as f:
        stats = json.load(f)
    assert {k: stats[k] for k in ("input", "emitted", "filtered", "skipped_invalid")} == {
        "input": 3,
        "emitted": 1,
        "filtered": 1,
        "skipped_invalid": 1,
    }

    with open(out + ".provenance.json") as f:
        provenance = json.load(f)
    assert provenance["command"] == "build-dataset"
    assert provenance["effective_config"]["dataset"]["max_tokens"] == 8


def test_build_dataset_default_limit(tmpdir) -> None:
    path = tmpdir.join("traces.jsonl")
    path.write(serialize_trace(make_trace([[0.0] * 4094], trace_id="too-long")) + "\n")
    out = str(tmpdir.join("dataset.jsonl"))

    assert BuildDataset(argv=["--in", str(path), "--out", out, "--kappa", "0"]).main() == 0

    with open(out) as f:
        assert f.read() == ""
    with open(out + ".stats.json") as f:
        assert json.load(f)["filtered"] == 1
