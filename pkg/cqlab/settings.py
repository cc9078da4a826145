import logging
from pathlib import Path

import sentry_sdk
from sentry_sdk.integrations.django import DjangoIntegration
from sentry_sdk.integrations.celery import CeleryIntegration
from sentry_sdk.integrations.logging import LoggingIntegration

import environ

from cqlab import __version__

BASE_DIR = Path(__file__).resolve().parent.parent

environ.Env.read_env(BASE_DIR / "app.env")
env = environ.Env()

SECRET_KEY = env("SECRET", cast=str, default="cqlab-insecure-change-me")

DEBUG = env("DEBUG", cast=bool, default=False)

ALLOWED_HOSTS: list[str] = []

INSTALLED_APPS = [
    "django.contrib.contenttypes",
    "django.contrib.auth",

    "rest_framework",
    "django_celery_results",

    "common",
    "linalg",
    "measurement",
    "hypotest",
    "decoding",
    "gentle",
    "lab",
]

DATABASES = {
    "default": env.db("DATABASE_URL", default="sqlite:///db.sqlite3"),
}

LANGUAGE_CODE = env("LANGUAGE_CODE", default="en-us")
TIME_ZONE = env("TIME_ZONE", default="UTC")
USE_I18N = False
USE_TZ = True

DEFAULT_AUTO_FIELD = "django.db.models.BigAutoField"

TOOL_VERSION = __version__

# Hilbert-space limits
CQSEQDEC_MAX_DIM = env("CQSEQDEC_MAX_DIM", cast=int, default=4096)
CQSEQDEC_MAX_BRANCH_AMPLITUDES = env("CQSEQDEC_MAX_BRANCH_AMPLITUDES", cast=int, default=4 ** 11)
CQSEQDEC_CHUNK_SIZE = env("CQSEQDEC_CHUNK_SIZE", cast=int, default=100)

CELERY_BROKER_URL = env("CELERY_BROKER_URL", default="redis://localhost:6379/0")
CELERY_RESULT_BACKEND = "django-db"
CELERY_TASK_ALWAYS_EAGER = env("CELERY_TASK_ALWAYS_EAGER", cast=bool, default=True)
CELERY_TASK_EAGER_PROPAGATES = env("CELERY_TASK_EAGER_PROPAGATES", cast=bool, default=True)
CELERY_TASK_SERIALIZER = "json"
CELERY_RESULT_SERIALIZER = "json"
CELERY_TASK_TRACK_STARTED = True
CELERY_TIMEZONE = TIME_ZONE
CELERY_WORKER_CONCURRENCY = env("CELERY_WORKER_CONCURRENCY", cast=int, default=4)
CELERY_WORKER_PREFETCH_MULTIPLIER = env("CELERY_WORKER_PREFETCH_MULTIPLIER", cast=int, default=1)

REST_FRAMEWORK = {
    "STRICT_JSON": True,
    "UNICODE_JSON": False,
}

LOG_LEVEL = env("LOG_LEVEL", cast=str, default="INFO")

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "plain": {"format": "%(asctime)s %(levelname)s %(name)s: %(message)s"},
    },
    "handlers": {
        "stderr": {
            "class": "logging.StreamHandler",
            "stream": "ext://sys.stderr",
            "formatter": "plain",
        },
    },
    "loggers": {
        name: {"handlers": ["stderr"], "level": LOG_LEVEL, "propagate": False}
        for name in ("common", "linalg", "measurement", "hypotest", "decoding", "gentle", "lab")
    },
}

sentry_sdk.init(
    dsn=env("SENTRY_DSN", cast=str, default=""),
    integrations=[
        DjangoIntegration(),
        CeleryIntegration(),
        LoggingIntegration(
            level=logging.INFO,
            event_level=logging.WARNING,
        ),
    ],
    environment=env("SENTRY_ENV", cast=str, default="development"),
    attach_stacktrace=True,
    send_default_pii=False,
    traces_sample_rate=env.float("SENTRY_TRACES_SAMPLE_RATE", default=0.0),
)
