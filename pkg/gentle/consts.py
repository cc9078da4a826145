POLAR_FACTOR_TOL = 1e-9


class ReversalScheme:
    POLAR = "polar"
    FORWARD_BACKWARD = "forward_backward"
