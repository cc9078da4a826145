import logging

from celery import shared_task

from lab.services import SweepService

logger = logging.getLogger(__name__)


@shared_task
def run_bounds_chunk_task(*, suite: str, dim: int, seq_len: int, seed: int, start: int, stop: int) -> list[dict]:
    logger.info("run_bounds_chunk_task starting", extra={"suite": suite, "start": start, "stop": stop})
    rows = SweepService.run_instances(suite, dim=dim, seq_len=seq_len, seed=seed, start=start, stop=stop)
    logger.info("run_bounds_chunk_task finished", extra={"suite": suite, "start": start, "stop": stop})
    return rows
