# SPDX-License-Identifier: GPL-3.0-or-later
from .compressed import CompressedCot, Element, KeptStep, Skip  # noqa: F401
from .enums import (  # noqa: F401
    EntropyMode,
    EvalMode,
    ReportFormat,
    RewardComponent,
    Strategy,
)
from .trace import (  # noqa: F401
    LOGPROB_TOLERANCE,
    Span,
    Step,
    TokenRecord,
    TraceRecord,
    parse_trace_line,
    serialize_trace,
    trace_from_dict,
    validate_top_logprobs,
)
