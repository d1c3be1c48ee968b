"""Typed failures raised by the numerical routines.

The CLI reports ``type(err).__name__`` on a numerical failure, so every
class here is part of the user-facing surface.
"""


class EvosgError(Exception):
    """Base class for all library failures."""


class CompatibilityError(EvosgError, ValueError):
    """Two signals live on different grids or carry different weights."""


class AlignmentError(EvosgError, ValueError):
    """A time or delay is not an integer multiple of the grid step."""


class InvalidWeightError(EvosgError, ValueError):
    """The exponential weight is not admissible for the operation."""


class AbscissaError(EvosgError, ValueError):
    """A material law was used at or left of its abscissa."""


class NotInDomainError(EvosgError):
    """The argument fails the numerical domain test of an unbounded operator."""


class NoLimitError(NotInDomainError):
    """A one-sided limit estimate did not settle."""


class IllPosedError(EvosgError):
    """A frequency system was singular or too badly conditioned."""

    def __init__(self, message, xi=None, cond=None):
        super().__init__(message)
        self.xi = xi
        self.cond = cond


class NotRegularisingError(EvosgError):
    """The regularising limit of a material law could not be formed."""


class InadmissibleHistoryError(EvosgError):
    """A history lacks the properties needed to start an initial value problem."""


class ResolventError(EvosgError):
    """The resolvent (lambda M(lambda) + A)^-1 does not exist at the requested point."""


class OracleUnavailableError(EvosgError):
    """The reference solver cannot handle this input (e.g. a singular pencil)."""


class OracleFailure(EvosgError):
    """The reference solver detected its own instability."""


class WellPosednessNotEstablishedError(EvosgError):
    """No candidate weight produced a positive accretivity constant."""


class ConfigError(EvosgError, ValueError):
    """A problem configuration does not match its schema."""
