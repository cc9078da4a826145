import logging

from celery import shared_task

from decoding.services import ChannelService, RandomCodingService

logger = logging.getLogger(__name__)


@shared_task
def run_coding_trials_task(
    *,
    channel: dict,
    prior: list[float],
    message_count: int,
    eps_prime: float,
    seed: int,
    start: int,
    stop: int,
) -> list[float]:
    logger.info("run_coding_trials_task starting", extra={"start": start, "stop": stop, "seed": seed})

    setup = RandomCodingService.prepare(ChannelService.from_payload(channel), prior, eps_prime)
    errors = RandomCodingService.run_trials(setup, message_count=message_count, seed=seed, start=start, stop=stop)

    logger.info("run_coding_trials_task finished", extra={"start": start, "stop": stop})
    return errors
