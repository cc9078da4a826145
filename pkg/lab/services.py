import logging
import math
from itertools import combinations

import numpy as np
from django.conf import settings
from rest_framework.parsers import JSONParser
from rest_framework.renderers import JSONRenderer

from common.exceptions import ParameterError
from common.utils import finite_or_tag, run_chunked
from decoding.entities import Codebook, CqChannel, ExperimentReport
from decoding.services import ChannelService, RandomCodingService, SequentialDecoderService
from decoding.tasks import run_coding_trials_task
from gentle.services import GentleService
from lab import consts
from lab.models import ResultRecord
from lab.serializers import (
    ChannelFileSerializer,
    CodebookFileSerializer,
    PovmFileSerializer,
    ResultRecordSerializer,
    StateFileSerializer,
)
from linalg import consts as linalg_consts
from linalg.services import OperatorHelper, SamplingService

logger = logging.getLogger(__name__)


class FileService:
    @staticmethod
    def read(path) -> object:
        with open(path, "rb") as fh:
            return JSONParser().parse(fh)

    @staticmethod
    def render(data) -> bytes:
        return JSONRenderer().render(data)

    @staticmethod
    def write(path, data) -> None:
        with open(path, "wb") as fh:
            fh.write(FileService.render(data) + b"\n")

    @staticmethod
    def _validated(serializer_class, data, **context) -> dict:
        serializer = serializer_class(data=data, context=context)
        serializer.is_valid(raise_exception=True)
        return serializer.validated_data

    @staticmethod
    def load_channel(path) -> tuple[CqChannel, np.ndarray]:
        data = FileService._validated(ChannelFileSerializer, FileService.read(path))
        inputs = data["inputs"]
        channel = ChannelService.channel({e["symbol"]: e["state"] for e in inputs}, [e["symbol"] for e in inputs])
        prior = np.array([e["prob"] for e in inputs], dtype=float)
        return channel, prior / math.fsum(prior)

    @staticmethod
    def save_channel(path, channel: CqChannel, prior) -> None:
        FileService.write(path, ChannelFileSerializer((channel, prior)).data)

    @staticmethod
    def load_state(path, *, subnormalized: bool = False) -> np.ndarray:
        data = FileService.read(path)
        if isinstance(data, dict) and subnormalized:
            data = {"subnormalized": True, **data}
        return FileService._validated(StateFileSerializer, data)["state"]

    @staticmethod
    def load_povm(path) -> list[np.ndarray]:
        return list(FileService._validated(PovmFileSerializer, FileService.read(path))["elements"])

    @staticmethod
    def load_codebook(path, channel: CqChannel) -> Codebook:
        data = FileService._validated(CodebookFileSerializer, FileService.read(path), symbols=set(channel.symbols))
        return ChannelService.codebook(data["codewords"], channel)

    @staticmethod
    def save_codebook(path, codebook: Codebook) -> None:
        FileService.write(path, CodebookFileSerializer(codebook).data)

    @staticmethod
    def load_result(path) -> dict:
        serializer = ResultRecordSerializer(data=FileService.read(path))
        serializer.is_valid(raise_exception=True)
        return serializer.data


class RecordService:
    @staticmethod
    def jsonable(value):
        if isinstance(value, dict):
            return {str(k): RecordService.jsonable(v) for k, v in value.items()}
        if isinstance(value, (list, tuple)):
            return [RecordService.jsonable(v) for v in value]
        if isinstance(value, np.ndarray):
            return RecordService.jsonable(value.tolist())
        if isinstance(value, (bool, np.bool_)):
            return bool(value)
        if isinstance(value, (int, np.integer)):
            return int(value)
        if isinstance(value, (float, np.floating)):
            return finite_or_tag(float(value))
        return value

    @staticmethod
    def build(*, command: str, parameters: dict, outputs: dict, seed: int, wall_time_ms: float) -> dict:
        return {
            "command": command,
            "parameters": RecordService.jsonable(parameters),
            "outputs": RecordService.jsonable(outputs),
            "seed": int(seed),
            "tool_version": settings.TOOL_VERSION,
            "wall_time_ms": float(wall_time_ms),
        }

    @staticmethod
    def render(record: dict) -> bytes:
        return FileService.render(record)

    @staticmethod
    def save(record: dict) -> ResultRecord:
        serializer = ResultRecordSerializer(data=record)
        serializer.is_valid(raise_exception=True)
        instance = serializer.save()
        logger.info("Saved result record", extra={"record_id": instance.pk, "command": record["command"]})
        return instance


class GridService:
    @staticmethod
    def eps_prime_grid(spec: str) -> list[float]:
        """Parse ``a:b:step`` (both ends inclusive) or a comma-separated list of values."""
        spec = str(spec).strip()
        try:
            if ":" not in spec:
                values = [float(v) for v in spec.split(",") if v.strip()]
            else:
                parts = [float(v) for v in spec.split(":")]
                if len(parts) != 3:
                    raise ValueError(spec)
                start, stop, step = parts
                if step <= 0 or stop < start:
                    raise ParameterError(f"Grid {spec!r} needs start <= stop and a positive step.")
                count = int(math.floor((stop - start) / step + consts.GRID_TOL)) + 1
                if count > consts.MAX_GRID_POINTS:
                    raise ParameterError(f"Grid {spec!r} has {count} points.")
                values = [start + i * step for i in range(count)]
        except ValueError as exc:
            raise ParameterError(f"Cannot parse grid {spec!r}.") from exc

        if not values:
            raise ParameterError("Grid is empty.")
        return values

    @staticmethod
    def prior_grid(spec: str, size: int) -> list[np.ndarray]:
        spec = str(spec).strip()
        if spec == consts.PriorGrid.UNIFORM:
            return [np.full(size, 1.0 / size)]

        if spec.startswith(consts.PriorGrid.SIMPLEX_PREFIX):
            try:
                n = int(spec[len(consts.PriorGrid.SIMPLEX_PREFIX):])
            except ValueError as exc:
                raise ParameterError(f"Cannot parse prior grid {spec!r}.") from exc
            if n < 1:
                raise ParameterError("Simplex resolution must be at least 1.")
            if math.comb(n + size - 1, size - 1) > consts.MAX_GRID_POINTS:
                raise ParameterError(f"Prior grid {spec!r} is too large.")
            return [np.array(c, dtype=float) / n for c in GridService._compositions(n, size)]

        priors = []
        for chunk in spec.split(";"):
            try:
                prior = np.array([float(v) for v in chunk.split(",")], dtype=float)
            except ValueError as exc:
                raise ParameterError(f"Cannot parse prior {chunk!r}.") from exc
            if prior.size != size:
                raise ParameterError(f"Prior {chunk!r} has {prior.size} entries, channel has {size} symbols.")
            priors.append(prior)
        return priors

    @staticmethod
    def _compositions(total: int, parts: int):
        """All tuples of ``parts`` non-negative integers summing to ``total``, in lexicographic order."""
        for bars in combinations(range(total + parts - 1), parts - 1):
            edges = (-1,) + bars + (total + parts - 1,)
            yield tuple(edges[i + 1] - edges[i] - 1 for i in range(parts))


class SweepService:
    """Seeded randomized instances of the union-bound and gentle-measurement inequalities."""

    @staticmethod
    def _projectors(rng, dim: int, count: int) -> list[np.ndarray]:
        return [SamplingService.sample_projector(dim, int(rng.integers(0, dim + 1)), rng) for _ in range(count)]

    @staticmethod
    def instance(suite: str, *, dim: int, seq_len: int, seed: int, index: int) -> dict:
        suite = consts.Suite.canonical(suite)
        rng = OperatorHelper.deterministic_rng(seed=seed, stream=f"{suite}:{index}")
        rho = SamplingService.sample_state(dim, rng)

        if suite == consts.Suite.SEN:
            check = SequentialDecoderService.union_bound_check(rho, SweepService._projectors(rng, dim, seq_len))
            return {"index": index, "lhs": check.lhs, "rhs": check.rhs, "slack": check.slack}

        if suite == consts.Suite.POVM_UNION:
            sigma = rho * rng.uniform(0.0, 1.0)
            effects = [SamplingService.sample_effect(dim, rng) for _ in range(seq_len)]
            check = SequentialDecoderService.union_bound_check(sigma, effects)
            row = {"index": index, "lhs": check.lhs, "rhs": check.rhs, "slack": check.slack}
            if seq_len <= consts.DILATION_CHECK_MAX_LEN:
                dilated = SequentialDecoderService.union_bound_dilated(sigma, effects)
                row["dilation_diff"] = abs(check.lhs - dilated.lhs)
            return row

        if suite == consts.Suite.GENTLE:
            gap = GentleService.gentle_gap(rho, SamplingService.sample_effect(dim, rng), enforce=False)
            return {"index": index, "lhs": gap.disturbance, "rhs": gap.bound, "slack": gap.slack}

        if suite in (consts.Suite.POLAR, consts.Suite.FORWARD_BACKWARD):
            scheme = GentleService.polar_reversal if suite == consts.Suite.POLAR else GentleService.forward_backward
            report = scheme(rho, SweepService._projectors(rng, dim, seq_len), enforce=False)
            return {
                "index": index,
                "lhs": report.disturbance,
                "rhs": report.bound,
                "slack": min(report.slack, report.success_slack),
            }

        raise ParameterError(f"Unknown suite {suite!r}.")

    @staticmethod
    def run_instances(suite: str, *, dim: int, seq_len: int, seed: int, start: int, stop: int) -> list[dict]:
        return [
            SweepService.instance(suite, dim=dim, seq_len=seq_len, seed=seed, index=i) for i in range(start, stop)
        ]

    @staticmethod
    def summarize(rows: list[dict]) -> dict:
        worst = min(rows, key=lambda r: r["slack"])
        violations = [r["index"] for r in rows if r["slack"] < -linalg_consts.SLACK_TOL]
        summary = {
            "instances": len(rows),
            "min_slack": worst["slack"],
            "worst_index": worst["index"],
            "violations": len(violations),
            "violating_indices": violations[:20],
        }
        diffs = [r["dilation_diff"] for r in rows if "dilation_diff" in r]
        if diffs:
            summary["max_dilation_diff"] = max(diffs)
        return summary


class ExperimentService:
    @staticmethod
    def run(
        channel: CqChannel,
        prior,
        *,
        message_count: int,
        eps_prime: float,
        trials: int,
        seed: int,
        parallel: bool = False,
    ) -> ExperimentReport:
        RandomCodingService.check_counts(message_count, trials)
        setup = RandomCodingService.prepare(channel, prior, eps_prime)

        if parallel:
            errors = run_chunked(
                run_coding_trials_task,
                total=int(trials),
                parallel=True,
                channel=ChannelService.to_payload(channel),
                prior=[float(p) for p in prior],
                message_count=int(message_count),
                eps_prime=float(eps_prime),
                seed=int(seed),
            )
        else:
            errors = RandomCodingService.run_trials(
                setup, message_count=message_count, seed=seed, start=0, stop=int(trials)
            )
        return RandomCodingService.summarize(setup, errors, message_count, enforce=False)
