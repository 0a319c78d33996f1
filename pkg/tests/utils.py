# SPDX-License-Identifier: GPL-3.0-or-later
import json
from typing import Any, Dict, Iterable, List, Optional, Sequence

from cottools._stepentropy.models import TokenRecord, TraceRecord, serialize_trace


def read_jsonl(path: str) -> List[Dict[str, Any]]:
    with open(path, "r") as fd:
        return [json.loads(line) for line in fd if line.strip()]


def write_jsonl(path: str, records: Iterable[Any]) -> str:
    with open(path, "w") as fd:
        for record in records:
            if isinstance(record, TraceRecord):
                fd.write(serialize_trace(record) + "\n")
            else:
                fd.write(json.dumps(record) + "\n")
    return str(path)


def make_trace(
    steps: Sequence[Sequence[float]],
    trace_id: str = "t1",
    answer: str = " \\boxed{5}",
    ground_truth: Optional[str] = "5",
    problem: str = "What is 2 + 3?",
) -> TraceRecord:
    """
    Build an exact-mode trace whose steps hold one token per listed entropy.

    Step ``i`` token ``j`` reads ``s<i>t<j>``; steps are joined by ``\\n\\n``
    tokens and every structural token has zero entropy.
    """
    tokens = [TokenRecord(text="<think>", entropy_bits=0.0)]
    for i, entropies in enumerate(steps):
        if i:
            tokens.append(TokenRecord(text="\n\n", entropy_bits=0.0))
        for j, bits in enumerate(entropies):
            prefix = "" if j == 0 else " "
            tokens.append(TokenRecord(text=f"{prefix}s{i}t{j}", entropy_bits=bits))
    tokens.append(TokenRecord(text="</think>", entropy_bits=0.0))
    if answer:
        tokens.append(TokenRecord(text=answer, entropy_bits=0.0))
    return TraceRecord(
        id=trace_id,
        problem=problem,
        raw_completion="".join(t.text for t in tokens),
        tokens=tokens,
        ground_truth=ground_truth,
    )


def make_truncated_trace(trace_id: str = "cut") -> TraceRecord:
    """Build a trace whose think region never closes, flagged as the collector does."""
    texts = ["<think>", "s0t0", "\n\n", "s1t0"]
    return TraceRecord(
        id=trace_id,
        problem="What is 2 + 3?",
        raw_completion="".join(texts),
        tokens=[TokenRecord(text=text, entropy_bits=0.0) for text in texts],
        ground_truth="5",
        meta={"truncated": True},
    )
