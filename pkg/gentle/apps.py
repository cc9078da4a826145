from django.apps import AppConfig


class GentleConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "gentle"
    verbose_name = "Gentle measurement"
