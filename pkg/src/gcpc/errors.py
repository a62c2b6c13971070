"""Exception types raised by the library."""


class GcpcError(Exception):
    """Base class for library errors."""


class ParameterError(GcpcError, ValueError):
    """Invalid distribution parameters or inputs."""


class ConvergenceError(GcpcError, RuntimeError):
    """An iterative routine (quadrature, optimizer) failed to converge."""


class DegenerateError(GcpcError, ValueError):
    """A linear predictor, design matrix or Hessian is degenerate."""
