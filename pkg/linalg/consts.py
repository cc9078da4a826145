# Construction tolerance for Hermiticity, unitarity and PSD clipping.
CONSTRUCTION_TOL = 1e-9

# Allowed slack when checking an inequality on computed values.
SLACK_TOL = 1e-8

# Residual below which a Gram-Schmidt candidate is considered dependent.
ORTHONORMAL_TOL = 1e-7

# Eigenvalues at or below this (relative to the largest) count as kernel.
KERNEL_TOL = 1e-10


