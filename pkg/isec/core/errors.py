"""Error types shared by every layer."""

from __future__ import annotations


class IsecError(Exception):
    """Base class for errors raised by the toolkit."""


class InstanceError(IsecError, ValueError):
    """The instance is malformed or does not contain the referenced object."""


class DomainError(IsecError, ValueError):
    """An argument lies outside the domain of the operation."""


class PreconditionError(IsecError, ValueError):
    """A documented precondition of the operation does not hold."""


class ConfigurationError(IsecError):
    """Required configuration (for example a measure) is missing."""


class ConsistencyError(IsecError):
    """A proven implication failed on a concrete instance."""
