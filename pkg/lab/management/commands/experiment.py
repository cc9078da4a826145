from common.exceptions import BoundViolation
from decoding import consts as decoding_consts
from lab.management.base import LabCommand, Outcome
from lab.services import ExperimentService, FileService


class Command(LabCommand):
    help = "Random-coding experiment: exact sequential-decoding error over i.i.d. codebooks against the analytic bound."

    randomized = True

    def add_run_arguments(self, parser):
        parser.add_argument("--channel", required=True)
        parser.add_argument("--messages", type=int, required=True)
        parser.add_argument("--eps-prime", type=float, required=True)
        parser.add_argument("--trials", type=int, default=1000)

    def execute_run(self, *, seed, **options):
        channel, prior = FileService.load_channel(options["channel"])
        report = ExperimentService.run(
            channel,
            prior,
            message_count=options["messages"],
            eps_prime=options["eps_prime"],
            trials=options["trials"],
            seed=seed,
            parallel=options["parallel"],
        )

        allowed = report.analytic_bound + decoding_consts.EXPERIMENT_STDERR_FACTOR * report.stderr
        violation = None
        if report.empirical_error > allowed:
            violation = BoundViolation(
                "Empirical error exceeds the random coding bound.", lhs=report.empirical_error, rhs=allowed
            )

        return Outcome(
            parameters={
                "channel": options["channel"],
                "messages": options["messages"],
                "eps_prime": options["eps_prime"],
                "trials": options["trials"],
            },
            outputs={
                "empirical_error": report.empirical_error,
                "stderr": report.stderr,
                "analytic_bound": report.analytic_bound,
                "intermediate_bound": report.intermediate_bound,
                "slack": report.slack,
                "tr_q_joint": report.tr_q_joint,
                "tr_q_product": report.tr_q_product,
                "d_h_bits": report.d_h_bits,
            },
            violation=violation,
        )
