class ExitCode:
    SUCCESS = 0
    INTERNAL = 1
    VALIDATION = 2
    BOUND_VIOLATION = 3
