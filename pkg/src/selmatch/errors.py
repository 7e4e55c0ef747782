"""Exception types shared across the library."""


class SelmatchError(Exception):
    """Base class for all library errors."""


class NonInjectiveLink(SelmatchError):
    """The link has a flat segment at the requested value; no unique inverse."""


class OutOfRange(SelmatchError):
    """A target value lies outside the link's image on the given domain."""


class DegenerateDomain(SelmatchError):
    """The link is constant over the domain, so span-normalized quantities are undefined."""


class RootNotBracketed(SelmatchError):
    """A scalar root could not be bracketed within the search interval."""


class DimensionMismatch(SelmatchError):
    """Score vectors of unequal length were combined."""


class Diverged(SelmatchError):
    """Gradient descent diverged (loss grew past the divergence threshold)."""


class ConfigError(SelmatchError):
    """A configuration document failed schema validation."""
