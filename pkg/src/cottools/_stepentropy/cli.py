# SPDX-License-Identifier: GPL-3.0-or-later
"""The ``cottools-stepentropy`` command dispatching to one task per subcommand."""
import sys
from typing import Dict, List, Optional, Sequence, Type

from .arguments import USAGE_EXIT_CODE
from .task import StepEntropyTask
from .tasks.build_dataset.command import BuildDataset
from .tasks.collect.command import CollectTraces
from .tasks.inspect.command import InspectTraces
from .tasks.mi_oracle.command import CheckMiBound
from .tasks.prune.command import PruneTraces
from .tasks.report.command import RenderReport
from .tasks.reward.command import ScoreCompletions
from .tasks.sweep.command import RunSweep
from .tasks.token_baseline.command import RunTokenBaseline

PROG = "cottools-stepentropy"

SUBCOMMANDS: Dict[str, Type[StepEntropyTask]] = {
    "collect": CollectTraces,
    "inspect": InspectTraces,
    "prune": PruneTraces,
    "reward": ScoreCompletions,
    "sweep": RunSweep,
    "token-baseline": RunTokenBaseline,
    "build-dataset": BuildDataset,
    "mi-oracle": CheckMiBound,
    "report": RenderReport,
}


def usage() -> str:
    """Return the top-level usage text listing the subcommands."""
    lines = [f"usage: {PROG} <subcommand> [options]", "", "subcommands:"]
    for name, cls in SUBCOMMANDS.items():
        summary = (cls.__doc__ or "").strip().splitlines()[0]
        lines.append(f"  {name:<16}{summary}")
    return "\n".join(lines) + "\n"


def run(argv: Optional[Sequence[str]] = None) -> int:
    """
    Run one subcommand.

    Args:
        argv (list, optional)
            The subcommand name followed by its arguments; ``sys.argv[1:]`` when
            omitted.
    Returns:
        The exit code: 0 on success, 1 on validation errors, 2 on backend
        failures and 64 on usage errors.
    """
    args: List[str] = list(sys.argv[1:] if argv is None else argv)
    if args and args[0] in ("-h", "--help"):
        sys.stdout.write(usage())
        return 0
    if not args or args[0] not in SUBCOMMANDS:
        sys.stderr.write(usage())
        if args:
            sys.stderr.write(f"{PROG}: error: unknown subcommand {args[0]!r}\n")
        return USAGE_EXIT_CODE

    name, rest = args[0], args[1:]
    try:
        task = SUBCOMMANDS[name](rest)
        task.parser.prog = f"{PROG} {name}"
        return task.main()
    except SystemExit as exc:
        # argparse exits on --help and usage errors
        code = exc.code
        return code if isinstance(code, int) else (0 if code is None else 1)
    except Exception:
        # main already printed the traceback
        return 1


def entry_point() -> None:
    """Define the CLI entrypoint for ``cottools-stepentropy``."""
    sys.exit(run())
