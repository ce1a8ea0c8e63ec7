"""Exception types shared across the package."""


class CapacityError(Exception):
    """Requested computation exceeds the supported enumeration capacity.

    The message names the largest feasible instance so callers can adjust.
    """


class MatchingInfeasibleError(Exception):
    """No fault set satisfies the requested defect/boundary parity constraints."""


class NonInvertibleChannelError(Exception):
    """A Pauli channel with a zero transfer eigenvalue cannot be quasi-inverted."""
