from django.apps import AppConfig


class HypotestConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "hypotest"
    verbose_name = "Hypothesis testing relative entropy"
