from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    """Numerical slack used by the validity checks.

    Every check that takes a ``tol`` argument falls back to these values.
    """

    orth: float = 1e-10
    sym: float = 1e-12
    eq: float = 1e-10


DEFAULT_TOL = Tolerances()
