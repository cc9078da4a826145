import logging

from django.core.exceptions import ValidationError as DjangoValidationError
from django.core.management.base import CommandError
from rest_framework.exceptions import ParseError, ValidationError as DRFValidationError

from common import consts
from common.exceptions import BoundViolation, LabException, NumericError

try:
    import sentry_sdk
except Exception:
    sentry_sdk = None


COMMAND_LOGGER = logging.getLogger("lab.command")


def flatten_errors(detail, prefix: str = "") -> list[str]:
    if isinstance(detail, dict):
        out = []
        for key, value in detail.items():
            path = key if not prefix else (prefix if key == "non_field_errors" else f"{prefix}.{key}")
            if key == "non_field_errors" and not prefix:
                path = ""
            out.extend(flatten_errors(value, path))
        return out

    if isinstance(detail, list):
        if all(not isinstance(item, (dict, list)) for item in detail):
            return [f"{prefix}: {item}" if prefix else str(item) for item in detail]

        out = []
        for i, item in enumerate(detail):
            if item:
                out.extend(flatten_errors(item, f"{prefix}[{i}]"))
        return out

    return [f"{prefix}: {detail}" if prefix else str(detail)]


def command_exception_handler(exc, context) -> CommandError:
    if isinstance(exc, (SystemExit, KeyboardInterrupt)):
        raise exc

    if isinstance(exc, CommandError):
        return exc

    command = context.get("command", "?")

    if isinstance(exc, BoundViolation):
        COMMAND_LOGGER.warning(
            "Bound violated",
            extra={"command": command, "lhs": exc.lhs, "rhs": exc.rhs, "slack": exc.slack},
        )
        return CommandError(
            f"Bound violated: lhs={exc.lhs!r} rhs={exc.rhs!r} slack={exc.slack!r}. {exc}",
            returncode=consts.ExitCode.BOUND_VIOLATION,
        )

    if isinstance(exc, ParseError):
        return CommandError(str(exc.detail), returncode=consts.ExitCode.VALIDATION)

    if isinstance(exc, DRFValidationError):
        message = "; ".join(flatten_errors(exc.detail)) or "Invalid input data."
        return CommandError(message, returncode=consts.ExitCode.VALIDATION)

    if isinstance(exc, DjangoValidationError):
        return CommandError(" ".join(map(str, exc.messages)), returncode=consts.ExitCode.VALIDATION)

    if isinstance(exc, LabException) and not isinstance(exc, NumericError):
        return CommandError(f"{type(exc).__name__}: {exc}", returncode=consts.ExitCode.VALIDATION)

    if isinstance(exc, OSError):
        return CommandError(f"IO error: {exc}", returncode=consts.ExitCode.VALIDATION)

    COMMAND_LOGGER.exception("Unhandled exception", exc_info=exc, extra={"command": command})
    if sentry_sdk:
        sentry_sdk.capture_exception(exc)

    return CommandError(f"Internal error: {exc}", returncode=consts.ExitCode.INTERNAL)
