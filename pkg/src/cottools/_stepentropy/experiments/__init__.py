# SPDX-License-Identifier: GPL-3.0-or-later
from .baseline import (  # noqa: F401
    TOKEN_LABEL,
    matched_step_row,
    token_baseline_hash,
    token_prune_baseline,
)
from .dataset import DatasetConfig, DatasetStats, build_dataset  # noqa: F401
from .mi_oracle import (  # noqa: F401
    AcceptanceResult,
    OracleResult,
    StepLayout,
    mi_oracle,
    run_mi_acceptance,
)
from .report import render  # noqa: F401
from .sweep import (  # noqa: F401
    SweepReport,
    SweepRow,
    SweepSpec,
    no_thinking_accuracy,
    strategy_ordering,
    sweep,
)
