"""Exception types shared across the package.

The CLI maps these onto exit codes, so anything a subcommand can fail
with should be (a subclass of) one of the classes below.
"""

from __future__ import annotations


class QStiefelError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(QStiefelError):
    """Invalid run configuration (bad parameter value, unparsable config)."""


class BundleFormatError(QStiefelError):
    """A bundle file is malformed or truncated."""


class TruncationError(QStiefelError):
    """The Fock cutoff is too small for the requested computation."""


class ClassificationError(QStiefelError):
    """Classification could not be completed on the given operators."""


class SpectrumViolationError(ClassificationError):
    """An eigenvalue sits where the spectral law forbids one."""


class NotIrreducibleError(ClassificationError):
    """An operation that needs an irreducible representation got a reducible one."""


class NotIsomorphicError(ClassificationError):
    """Requested intertwiner between non-isomorphic representations."""


class InconsistentRepresentationError(ClassificationError):
    """The operators do not satisfy the defining relations at the working tolerance."""
