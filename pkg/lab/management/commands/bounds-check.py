from lab.management.commands.bounds_check import Command  # noqa: F401
