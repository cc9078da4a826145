UINT64_MAX = 2 ** 64 - 1

DEFAULT_SEED = 0

# Range grids a:b:step include b when it is hit within this tolerance.
GRID_TOL = 1e-12

MAX_GRID_POINTS = 100_000

# POVM union-bound instances with at most this many effects are also run through the explicit probe dilation.
DILATION_CHECK_MAX_LEN = 3


class Suite:
    SEN = "sen"
    POVM_UNION = "povm-union"
    GENTLE = "gentle"
    POLAR = "polar"
    FORWARD_BACKWARD = "forward-backward"

    CHOICES = (
        (SEN, "Projector union bound"),
        (POVM_UNION, "POVM union bound through binary dilations"),
        (GENTLE, "Gentle measurement"),
        (POLAR, "Polar-decomposition reversal"),
        (FORWARD_BACKWARD, "Forward-backward reversal"),
    )

    VALUES = tuple(value for value, _ in CHOICES)

    # Alternate suite names accepted on the command line.
    ALIASES = {"lemma31": POVM_UNION}

    @classmethod
    def canonical(cls, name: str) -> str:
        return cls.ALIASES.get(name, name)


class GentleScheme:
    GENTLE = "gentle"
    DILATED = "dilated"
    POLAR = "polar"
    FORWARD_BACKWARD = "forward-backward"

    VALUES = (GENTLE, DILATED, POLAR, FORWARD_BACKWARD)


class PriorGrid:
    UNIFORM = "uniform"
    SIMPLEX_PREFIX = "simplex:"
