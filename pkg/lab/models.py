from django.db import models

from common.models import BaseModel


class ResultRecord(BaseModel):
    command = models.CharField(max_length=32, db_index=True)
    parameters = models.JSONField(default=dict)
    outputs = models.JSONField(default=dict)
    seed = models.CharField(max_length=20)
    tool_version = models.CharField(max_length=32)
    wall_time_ms = models.FloatField(default=0.0)

    class Meta(BaseModel.Meta):
        indexes = [
            models.Index(fields=["command", "created_at"], name="result_command_created_idx"),
        ]

    def __str__(self):
        return f"{self.command} (seed {self.seed})"
