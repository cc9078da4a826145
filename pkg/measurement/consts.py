# Probe basis index that signals acceptance (operator Λ) for binary dilations.
ACCEPT_OUTCOME = 1
REJECT_OUTCOME = 0

PROBE_READY_STATE = 0


class DilationKind:
    BINARY = "BINARY"
    GENERAL = "GENERAL"
