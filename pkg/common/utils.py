from __future__ import annotations

import math

from celery import group
from django.conf import settings


def finite_or_tag(v: float) -> float | str:
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return float(v)


def chunk_bounds(total: int, *, chunk_size: int | None = None) -> list[tuple[int, int]]:
    size = max(1, int(chunk_size or settings.CQSEQDEC_CHUNK_SIZE))
    return [(start, min(start + size, total)) for start in range(0, total, size)]


def run_chunked(task, *, total: int, parallel: bool, **kwargs) -> list:
    """Run ``task`` over [0, total) in chunks and concatenate results in index order."""
    bounds = chunk_bounds(total)

    if parallel:
        job = group(task.s(start=start, stop=stop, **kwargs) for start, stop in bounds)
        chunks = job.apply_async().get(disable_sync_subtasks=False)
    else:
        chunks = [task(start=start, stop=stop, **kwargs) for start, stop in bounds]

    out: list = []
    for chunk in chunks:
        out.extend(chunk)
    return out
