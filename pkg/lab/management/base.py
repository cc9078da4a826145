import argparse
import logging
import time
from dataclasses import dataclass, field

from django.core.management.base import BaseCommand

from common.exceptions import BoundViolation, ParameterError
from common.handlers import command_exception_handler
from lab import consts
from lab.services import RecordService

logger = logging.getLogger("lab.command")


def seed_value(raw: str) -> int:
    try:
        seed = int(raw)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"invalid seed {raw!r}") from exc
    if not 0 <= seed <= consts.UINT64_MAX:
        raise argparse.ArgumentTypeError(f"seed {seed} outside [0, 2^64 - 1]")
    return seed


@dataclass
class Outcome:
    parameters: dict
    outputs: dict
    violation: BoundViolation | None = field(default=None)


class LabCommand(BaseCommand):
    """
    Shared surface of the lab commands: one ResultRecord per run, written to stdout or --out.

    Subclasses implement ``execute_run`` and return an Outcome; a bound violation is reported
    after the record is written so the numbers that failed are still on disk.
    """

    record_name: str = ""
    randomized: bool = False

    def add_arguments(self, parser):
        parser.add_argument("--out", default=None, help="Write the result record here instead of stdout.")
        parser.add_argument("--seed", type=seed_value, default=None, help="Unsigned 64-bit seed (default 0).")
        parser.add_argument("--strict", action="store_true", help="Require an explicit --seed for randomized runs.")
        parser.add_argument("--save", action="store_true", help="Also store the record in the database.")
        parser.add_argument("--parallel", action="store_true", help="Dispatch chunks through Celery.")
        self.add_run_arguments(parser)

    def add_run_arguments(self, parser):
        pass

    def execute_run(self, *, seed: int, **options) -> Outcome:
        raise NotImplementedError

    @property
    def command_label(self) -> str:
        return self.record_name or type(self).__module__.rsplit(".", 1)[-1]

    def handle(self, *args, **options):
        label = self.command_label
        try:
            seed = options.get("seed")
            if seed is None:
                if options.get("strict") and self.randomized:
                    raise ParameterError(f"{label} is randomized; --strict requires --seed.")
                seed = consts.DEFAULT_SEED

            started = time.perf_counter()
            outcome = self.execute_run(**{**options, "seed": seed})
            wall_time_ms = (time.perf_counter() - started) * 1000.0

            record = RecordService.build(
                command=label,
                parameters=outcome.parameters,
                outputs=outcome.outputs,
                seed=seed,
                wall_time_ms=wall_time_ms,
            )
            self.emit(record, options.get("out"))
            if options.get("save"):
                RecordService.save(record)

            logger.info("Command finished", extra={"command": label, "seed": seed, "wall_time_ms": wall_time_ms})
            if outcome.violation is not None:
                raise outcome.violation
        except Exception as exc:
            raise command_exception_handler(exc, {"command": label})

    def emit(self, record: dict, out) -> None:
        text = RecordService.render(record)
        if out:
            with open(out, "wb") as fh:
                fh.write(text + b"\n")
        else:
            self.stdout.write(text.decode("utf-8"))
