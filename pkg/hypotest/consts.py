import math

# |eigenvalue| at or below this puts a direction in the boundary eigenspace.
BOUNDARY_TOL = 1e-10

BISECTION_MAX_ITERATIONS = 200
BRACKET_MAX_DOUBLINGS = 64

# Relative width at which the threshold bisection is considered converged.
BISECTION_REL_TOL = 1e-15

# Slack on the acceptance target for the kernel-of-sigma test.
ZERO_EPS_SLACK = 1e-12

# A target within this of the null trace must accept the whole support of the null hypothesis.
FULL_ACCEPT_TOL = 1e-9

# Type-II error at or below this reports an infinite entropy.
BETA_ZERO = 1e-15

# Prior vectors must sum to one within this; accepted priors are renormalized.
PRIOR_SUM_TOL = 1e-9

INFINITE_BITS = math.inf
