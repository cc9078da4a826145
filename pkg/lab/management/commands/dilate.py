from common.exceptions import MeasurementSpecError
from lab.management.base import LabCommand, Outcome
from lab.services import FileService
from linalg.utils import encode_matrix
from measurement.services import DilationService, PovmService


class Command(LabCommand):
    help = "Unitary dilation of a POVM onto system (x) probe."

    def add_run_arguments(self, parser):
        parser.add_argument("--povm", required=True)
        parser.add_argument(
            "--binary",
            action="store_true",
            help="Square-root dilation of a binary POVM: elements (reject, accept) or a single accept element.",
        )

    def execute_run(self, *, seed, **options):
        elements = FileService.load_povm(options["povm"])

        if options["binary"]:
            if len(elements) == 1:
                p = PovmService.binary(elements[0])
            elif len(elements) == 2:
                p = PovmService.as_binary(PovmService.general(elements))
            else:
                raise MeasurementSpecError(f"A binary POVM has one or two elements, got {len(elements)}.")
            dilation = DilationService.dilate_binary(p)
        else:
            dilation = DilationService.dilate_general(PovmService.general(elements))

        return Outcome(
            parameters={"povm": options["povm"], "binary": options["binary"]},
            outputs={
                "kind": dilation.kind,
                "system_dim": dilation.system_dim,
                "probe_dim": dilation.probe_dim,
                "outcome_basis": list(dilation.outcome_basis),
                "unitary": encode_matrix(dilation.unitary),
            },
        )
