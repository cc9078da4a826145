from decoding.services import CapacityService
from lab.management.base import LabCommand, Outcome
from lab.services import FileService, GridService


class Command(LabCommand):
    help = "One-shot capacity lower bound maximized over a prior grid and an eps' grid."

    def add_run_arguments(self, parser):
        parser.add_argument("--channel", required=True)
        parser.add_argument("--eps", type=float, required=True)
        parser.add_argument("--eps-prime-grid", required=True, help="a:b:step (inclusive) or v1,v2,...")
        parser.add_argument("--prior-grid", default="uniform", help="uniform, simplex:N or p,p,...;p,p,...")

    def execute_run(self, *, seed, **options):
        channel, _ = FileService.load_channel(options["channel"])
        priors = GridService.prior_grid(options["prior_grid"], len(channel.symbols))
        eps_primes = GridService.eps_prime_grid(options["eps_prime_grid"])
        best = CapacityService.capacity_lower_bound(channel, options["eps"], priors, eps_primes)

        return Outcome(
            parameters={
                "channel": options["channel"],
                "eps": options["eps"],
                "eps_prime_grid": options["eps_prime_grid"],
                "prior_grid": options["prior_grid"],
            },
            outputs={
                "bits": best.bits,
                "argmax_prior": list(best.prior),
                "argmax_eps_prime": best.eps_prime,
                "d_h_bits": best.d_h_bits,
                "evaluations": best.evaluations,
                "symbols": list(channel.symbols),
            },
        )
