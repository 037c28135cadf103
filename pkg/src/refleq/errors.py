"""Exception types shared across the library."""


class RefleqError(Exception):
    """Base class for all library errors."""


class ResonantKernel(RefleqError):
    """The coefficient sits on an eigenvalue m = k*pi/T, the kernel is undefined."""

    def __init__(self, m, T, k):
        self.m = m
        self.T = T
        self.k = k
        super().__init__(f"m={m!r}, T={T!r} is resonant (m = {k}*pi/T); kernel undefined")


class OutOfDomain(RefleqError):
    """A point lies outside the interval [-T, T]."""


class OnDiagonal(RefleqError):
    """Operation requested on |t| = |s| where it is not defined."""


class ParameterMismatch(RefleqError):
    """Two kernels do not form a (m, -m) pair with equal T."""


class InternalInconsistency(RefleqError):
    """Grid evidence contradicts the analytic sign classification (a bug)."""


class QuadratureFailure(RefleqError):
    """Forcing-term evaluation failed during quadrature."""


class GridMismatch(RefleqError):
    """Grid function incompatible with the requested operation."""


class NonFinite(RefleqError):
    """Integration produced a non-finite state (blow-up)."""


class NoConvergence(RefleqError):
    """Newton iteration failed to converge."""

    def __init__(self, message, last_defect=None, iterations=None):
        super().__init__(message)
        self.last_defect = last_defect
        self.iterations = iterations


class SingularJacobian(RefleqError):
    """Finite-difference Jacobian unusable (non-finite entries)."""


class MonotonicityBroken(RefleqError):
    """An iterate left the monotone bracket; hypothesis or quadrature failure."""


class BadWindow(RefleqError):
    """Coefficient m outside the sign window required by the chosen result."""


class DomainViolation(RefleqError):
    """Inverse nonlinearity applied outside its range during integration."""
