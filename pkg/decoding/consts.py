# Reject probability below which a trajectory declares acceptance instead of renormalizing.
DEGENERATE_REJECT_PROB = 1e-14

# The explicit probe simulator keeps every probe: dimension d * 2**M.
DILATED_MAX_MESSAGES = 5

COHERENT_MAX_MESSAGES = 10

# Standard errors allowed between the empirical mean error and the analytic bound.
EXPERIMENT_STDERR_FACTOR = 3.0

ACCEPT = 1
REJECT = 0


class DecodeMode:
    EXACT = "exact"
    DILATED = "dilated"
    TRAJECTORY = "trajectory"
    COHERENT = "coherent"

    CHOICES = (
        (EXACT, "Probe-compressed recursion"),
        (DILATED, "Explicit M-probe dilation"),
        (TRAJECTORY, "Sampled measurement trajectories"),
        (COHERENT, "Coherent branch decomposition"),
    )

    VALUES = tuple(value for value, _ in CHOICES)
