# SPDX-License-Identifier: GPL-3.0-or-later
import logging
from argparse import ArgumentParser

from ...arguments import unsigned
from ...experiments import AcceptanceResult, run_mi_acceptance
from ...services import ConfigService, IoService
from ...task import RUN_RESULT, StepEntropyTask
from ...utils import dump_line

log = logging.getLogger("cottools.stepentropy")


class CheckMiBound(StepEntropyTask, ConfigService, IoService):
    """
    Check the step entropy bound on the answer information of pruned steps.

    Random enumerable language models are drawn and, for every model, the
    conditional mutual information between each step and the answer is
    computed exactly and compared with the step's conditional entropy. The same
    check runs for the growing sets of lowest-entropy steps. One record per
    check is written; the command fails when any check does not hold.
    """

    def add_service_args(self, parser: ArgumentParser) -> None:
        """Add the oracle arguments."""
        super(CheckMiBound, self).add_service_args(parser)

        group = parser.add_argument_group("Oracle")
        group.add_argument(
            "--count",
            metavar="UINT",
            type=unsigned,
            default=100,
            help="Number of random models to check (default: 100)",
        )
        group.add_argument(
            "--seed",
            metavar="UINT",
            type=unsigned,
            default=0,
            help="Seed of the random models (default: 0)",
        )

    @StepEntropyTask.step("Check bound")
    def check(self) -> AcceptanceResult:
        """Run the oracle over the random models."""
        return run_mi_acceptance(count=self.args.count, seed=self.args.seed)

    @StepEntropyTask.step("Write results")
    def write(self, result: AcceptanceResult) -> None:
        """Write one record per checked step or subset."""
        with self.open_output() as out:
            for row in result.rows():
                out.write(dump_line(row) + "\n")

    def run(self) -> RUN_RESULT:
        """Check the bound."""
        result = self.check()
        self.write(result)
        self.record_provenance(
            "mi-oracle", {"mi_oracle": {"count": self.args.count, "seed": self.args.seed}}
        )
        if result.holds:
            log.info("Bound holds on all %d model(s)", len(result.results))
        else:
            log.error("Bound violated, see the records with holds=false")
        return RUN_RESULT(result.holds, False, result)
