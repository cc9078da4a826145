from common.exceptions import BoundViolation
from hypotest.services import HypothesisTestService
from lab.management.base import LabCommand, Outcome
from lab.services import FileService
from linalg import consts as linalg_consts
from linalg.utils import encode_matrix


class Command(LabCommand):
    help = "Optimal Neyman-Pearson test between two states and its hypothesis-testing relative entropy."

    def add_run_arguments(self, parser):
        parser.add_argument("--rho", required=True)
        parser.add_argument("--sigma", required=True)
        parser.add_argument("--eps", type=float, required=True)
        parser.add_argument("--dual-check", action="store_true", help="Fail when the dual certificate exceeds beta.")

    def execute_run(self, *, seed, **options):
        rho = FileService.load_state(options["rho"], subnormalized=True)
        sigma = FileService.load_state(options["sigma"], subnormalized=True)
        test = HypothesisTestService.neyman_pearson(rho, sigma, options["eps"])

        violation = None
        if options["dual_check"] and test.duality_gap < -linalg_consts.SLACK_TOL:
            violation = BoundViolation("Dual certificate exceeds the optimal type-II error.", lhs=test.dual_value, rhs=test.beta)

        return Outcome(
            parameters={
                "rho": options["rho"],
                "sigma": options["sigma"],
                "eps": options["eps"],
                "dual_check": options["dual_check"],
            },
            outputs={
                "beta": test.beta,
                "d_h_bits": HypothesisTestService.bits(test.beta),
                "type1_error": test.type1_error,
                "threshold": test.threshold,
                "multiplier": test.multiplier,
                "boundary_fraction": test.boundary_fraction,
                "dual_value": test.dual_value,
                "duality_gap": test.duality_gap,
                "q": encode_matrix(test.q),
            },
            violation=violation,
        )
