from common.exceptions import BoundViolation, MeasurementSpecError
from gentle.services import GentleService
from lab import consts
from lab.management.base import LabCommand, Outcome
from lab.services import FileService
from linalg import consts as linalg_consts
from linalg.utils import encode_matrix
from measurement.services import PovmService


class Command(LabCommand):
    help = "Disturbance of a measurement (gentle, dilated) or of a projector sequence reversal (polar, forward-backward)."

    def add_run_arguments(self, parser):
        parser.add_argument("--rho", required=True)
        parser.add_argument("--ops", required=True, help="POVM-format file: one accept operator, or the projectors.")
        parser.add_argument("--scheme", choices=consts.GentleScheme.VALUES, default=consts.GentleScheme.GENTLE)

    def execute_run(self, *, seed, **options):
        rho = FileService.load_state(options["rho"], subnormalized=True)
        ops = FileService.load_povm(options["ops"])
        scheme = options["scheme"]

        if scheme in (consts.GentleScheme.GENTLE, consts.GentleScheme.DILATED):
            if len(ops) != 1:
                raise MeasurementSpecError(f"The {scheme} scheme takes a single accept operator, got {len(ops)}.")
            if scheme == consts.GentleScheme.GENTLE:
                gap = GentleService.gentle_gap(rho, ops[0], enforce=False)
            else:
                gap = GentleService.dilated_gentle(rho, PovmService.binary(ops[0]), enforce=False)
            outputs = {"disturbance": gap.disturbance, "bound": gap.bound, "slack": gap.slack}
            checks = [(gap.disturbance, gap.bound)]
        else:
            run = GentleService.polar_reversal if scheme == consts.GentleScheme.POLAR else GentleService.forward_backward
            report = run(rho, ops, enforce=False)
            outputs = {
                "scheme": report.scheme,
                "disturbance": report.disturbance,
                "bound": report.bound,
                "slack": report.slack,
                "success_gap": report.success_gap,
                "success_bound": report.success_bound,
                "success_slack": report.success_slack,
                "post_state": encode_matrix(report.post_state),
            }
            checks = [(report.disturbance, report.bound), (report.success_gap, report.success_bound)]

        violation = None
        for lhs, rhs in checks:
            if lhs > rhs + linalg_consts.SLACK_TOL:
                violation = BoundViolation(f"The {scheme} bound is violated.", lhs=lhs, rhs=rhs)
                break

        return Outcome(
            parameters={"rho": options["rho"], "ops": options["ops"], "scheme": scheme},
            outputs=outputs,
            violation=violation,
        )
