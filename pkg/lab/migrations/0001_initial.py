from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='ResultRecord',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('created_at', models.DateTimeField(auto_now_add=True)),
                ('updated_at', models.DateTimeField(auto_now=True)),
                ('command', models.CharField(db_index=True, max_length=32)),
                ('parameters', models.JSONField(default=dict)),
                ('outputs', models.JSONField(default=dict)),
                ('seed', models.CharField(max_length=20)),
                ('tool_version', models.CharField(max_length=32)),
                ('wall_time_ms', models.FloatField(default=0.0)),
            ],
            options={
                'ordering': ['-created_at'],
                'abstract': False,
                'indexes': [models.Index(fields=['command', 'created_at'], name='result_command_created_idx')],
            },
        ),
    ]
