from common.exceptions import BoundViolation, ParameterError
from common.utils import run_chunked
from lab import consts
from lab.management.base import LabCommand, Outcome
from lab.services import SweepService
from lab.tasks import run_bounds_chunk_task


class Command(LabCommand):
    help = "Seeded randomized sweep of a union-bound or gentle-measurement inequality; reports the minimum slack."

    record_name = "bounds-check"
    randomized = True

    def add_run_arguments(self, parser):
        parser.add_argument("--suite", choices=consts.Suite.VALUES + tuple(consts.Suite.ALIASES), required=True)
        parser.add_argument("--instances", type=int, default=1000)
        parser.add_argument("--dim", type=int, default=2)
        parser.add_argument("--seq-len", type=int, default=3)

    def execute_run(self, *, seed, **options):
        suite = consts.Suite.canonical(options["suite"])
        for key in ("instances", "dim", "seq_len"):
            if options[key] < 1:
                raise ParameterError(f"--{key.replace('_', '-')} must be at least 1.")

        rows = run_chunked(
            run_bounds_chunk_task,
            total=options["instances"],
            parallel=options["parallel"],
            suite=suite,
            dim=options["dim"],
            seq_len=options["seq_len"],
            seed=seed,
        )
        summary = SweepService.summarize(rows)

        violation = None
        if summary["violations"]:
            worst = rows[summary["worst_index"]]
            violation = BoundViolation(
                f"{summary['violations']} of {summary['instances']} instances violate the {suite} bound.",
                lhs=worst["lhs"],
                rhs=worst["lhs"] + worst["slack"],
            )

        return Outcome(
            parameters={
                "suite": suite,
                "instances": options["instances"],
                "dim": options["dim"],
                "seq_len": options["seq_len"],
            },
            outputs=summary,
            violation=violation,
        )
