"""Exceptions shared by the pure-Python and compiled code paths."""


class UnphysicalStateError(ValueError):
    """A covariance matrix violates the uncertainty principle."""


class OracleConvergenceError(RuntimeError):
    """The refinement of the measurement oracle did not settle."""


class BracketError(RuntimeError):
    """A root search could not bracket a sign change."""
