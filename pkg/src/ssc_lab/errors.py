"""Exception types shared across the package."""

from __future__ import annotations


class SSCLabError(Exception):
    """Base class for library errors."""


class Unrepresentable(SSCLabError):
    """An operation needs a closed form that the point representation lacks."""


class WidthExceeded(SSCLabError):
    """A certified interval came out too wide to be used as an exact value."""


class NoConvergence(SSCLabError):
    """Fixed-point iteration ran out of iterations."""


class DegenerateDenominator(SSCLabError):
    """A quotient denominator interval could not be certified positive."""


class PreconditionError(SSCLabError, ValueError):
    """An operation was called outside its documented domain."""
