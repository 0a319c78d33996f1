# SPDX-License-Identifier: GPL-3.0-or-later
import sys

if sys.version_info >= (3, 11):
    from enum import StrEnum  # pragma: no cover
else:
    from strenum import StrEnum  # pragma: no cover


class Strategy(StrEnum):
    """The step selection strategies used for pruning."""

    LOW_ENTROPY = "low-entropy"
    """Prune the steps with the lowest step entropy first."""

    HIGH_ENTROPY = "high-entropy"
    """Prune the steps with the highest step entropy first."""

    RANDOM = "random"
    """Prune a seeded uniform sample of the steps."""

    @classmethod
    def parse(cls, value: str) -> "Strategy":
        """
        Return the strategy for a name or one of its short aliases.

        Args:
            value (str)
                Either the full name (``low-entropy``) or the alias (``low``).
        Returns:
            The matching strategy.
        Raises:
            ValueError: when the name is unknown.
        """
        if isinstance(value, cls):
            return value
        name = str(value).strip().lower()
        name = _STRATEGY_ALIASES.get(name, name)
        try:
            return cls(name)
        except ValueError:
            raise ValueError(f"Unknown strategy: {value!r}") from None


_STRATEGY_ALIASES = {
    "low": "low-entropy",
    "high": "high-entropy",
    "rand": "random",
}


class EntropyMode(StrEnum):
    """How the per-token entropies of a report were obtained."""

    EXACT = "exact"
    """Every token carried a backend supplied full-distribution entropy."""

    TOPK_LOWER_BOUND = "topk-lower-bound"
    """At least one token entropy came from truncated logprobs plus a tail bucket."""


class EvalMode(StrEnum):
    """Where sweep answers are regenerated."""

    BACKEND = "backend"
    SYNTHETIC = "synthetic"


class ReportFormat(StrEnum):
    """Output formats of sweep reports."""

    TABLE = "table"
    CSV = "csv"
    PLOTDATA = "plotdata"


class RewardComponent(StrEnum):
    """The four additive components of the composite reward."""

    CORRECTNESS = "correctness"
    SKIP_RATIO = "skip_ratio"
    SKIP_NUM = "skip_num"
    LENGTH = "length"
