from common.exceptions import BoundViolation
from decoding import consts as decoding_consts
from decoding.services import SequentialDecoderService
from lab.management.base import LabCommand, Outcome
from lab.services import FileService
from linalg import consts as linalg_consts


class Command(LabCommand):
    help = "Sequential decoding of a fixed codebook with the hypothesis-test position operators."

    randomized = True

    def add_run_arguments(self, parser):
        parser.add_argument("--channel", required=True)
        parser.add_argument("--codebook", required=True)
        parser.add_argument("--eps-prime", type=float, required=True)
        parser.add_argument("--mode", choices=decoding_consts.DecodeMode.VALUES, default=decoding_consts.DecodeMode.EXACT)
        parser.add_argument("--trials", type=int, default=1000)

    def execute_run(self, *, seed, **options):
        channel, prior = FileService.load_channel(options["channel"])
        codebook = FileService.load_codebook(options["codebook"], channel)
        spec = SequentialDecoderService.decoder_spec(channel, prior, codebook, options["eps_prime"])
        stats = SequentialDecoderService.decoding_stats(
            channel, codebook, spec, mode=options["mode"], trials=options["trials"], seed=seed
        )

        violation = None
        if options["mode"] != decoding_consts.DecodeMode.TRAJECTORY:
            for m, (p, bound) in enumerate(zip(stats.per_message_success, stats.per_message_sen_rhs)):
                if 1 - p > bound + linalg_consts.SLACK_TOL:
                    violation = BoundViolation(f"Error of message {m} exceeds its bound.", lhs=1 - p, rhs=bound)
                    break

        return Outcome(
            parameters={
                "channel": options["channel"],
                "codebook": options["codebook"],
                "eps_prime": options["eps_prime"],
                "mode": options["mode"],
                "trials": options["trials"],
                "codewords": list(codebook.codewords),
            },
            outputs={
                "per_message_success": list(stats.per_message_success),
                "average_error": stats.average_error,
                "maximal_error": stats.maximal_error,
                "sen_rhs": stats.sen_rhs,
                "per_message_sen_rhs": list(stats.per_message_sen_rhs),
                "bound_value": stats.bound_value,
            },
            violation=violation,
        )
