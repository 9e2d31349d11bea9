"""Exception hierarchy shared across the package."""


class AnnulabError(Exception):
    """Base class for all package errors."""


class DomainError(AnnulabError, ValueError):
    """A point or length lies outside the chart / model domain."""


class InvalidPointError(AnnulabError, ValueError):
    """A point violates an operation precondition (e.g. not on the inner circle)."""


class DegenerateConfigurationError(AnnulabError, ValueError):
    """The configuration makes a formula singular (e.g. zero offset for cos beta)."""


class GeometryError(AnnulabError, ValueError):
    """Invalid circle/annulus geometry (intersecting circles, bad radii, ...)."""


class AssemblyError(AnnulabError, RuntimeError):
    """Finite-element assembly hit a degenerate element."""


class SolverError(AnnulabError, RuntimeError):
    """A linear or eigen solve failed to reach its stopping criterion."""


class OracleError(AnnulabError, RuntimeError):
    """A 1-D reference computation failed (e.g. eigenvalue bracketing)."""
