"""Exception hierarchy.

Everything user-triggerable derives from :class:`OrthoparaError` so callers
(and the CLI) can distinguish bad input from internal invariant violations,
which surface as plain ``ValueError``.
"""


class OrthoparaError(ValueError):
    """Base class for all input/validation errors raised by this package."""


# -- level-table parsing ----------------------------------------------------

class LevelTableError(OrthoparaError):
    """A row of a level table could not be parsed.

    Carries the 1-based line number of the offending row (``None`` when the
    value was constructed directly rather than parsed from a file).
    """

    def __init__(self, message: str, line_number: int | None = None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


class MalformedRow(LevelTableError):
    """Wrong field count or an unparseable numeric field."""


class UnknownUnit(LevelTableError):
    """Energy unit token is missing or not one of 'eV', 'cm-1'."""


class MalformedTerm(LevelTableError):
    """Term symbol unparseable, or multiplicity not 1 (para) or 3 (ortho)."""


class MalformedJ(LevelTableError):
    """J is not a non-negative multiple of 1/2."""


class NegativeEnergy(LevelTableError):
    """Level energy below the ground state (negative) or non-finite."""


# -- state preparation ------------------------------------------------------

class NotNormalized(OrthoparaError):
    """Amplitude pair violates |a|^2 + |b|^2 = 1 beyond tolerance."""


class WeightOutOfRange(OrthoparaError):
    """Branch weight outside [0, 1]."""


# -- dynamics ---------------------------------------------------------------

class NonPositiveLifetime(OrthoparaError):
    """Lifetime must be > 0."""


class NonPositiveRate(OrthoparaError):
    """Decay rate must be > 0."""


class NonPositiveWindow(OrthoparaError):
    """Observation window must be > 0."""


class NegativeTime(OrthoparaError):
    """Time grid points must be >= 0."""


# -- counting ---------------------------------------------------------------

class NegativeRate(OrthoparaError):
    """Mean photocount rate must be >= 0."""


class ZeroWindows(OrthoparaError):
    """At least one observation window is required."""


class InsufficientSupport(OrthoparaError):
    """Requested n_max truncates more than 1e-10 of the distribution's mass."""


class EmptySample(OrthoparaError):
    """A count sample with no windows cannot be analyzed."""
