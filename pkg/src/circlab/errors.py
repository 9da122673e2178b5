"""Exception types shared across the library.

Contract violations raise distinct subclasses so callers (and the CLI)
can tell a usage error from an internal inconsistency.
"""


class CirclabError(Exception):
    """Base class for all library errors."""


class MixedModulusError(CirclabError, ValueError):
    """Arithmetic attempted between residues with different moduli."""


class InvalidDivisorError(CirclabError, ValueError):
    """Requested subgroup order does not divide the group order."""


class InvalidFrameError(CirclabError, ValueError):
    """CRT moduli are not pairwise coprime."""


class InvalidConnectionSetError(CirclabError, ValueError):
    """Connection set contains 0 or an out-of-range element."""


class NotACirculantError(CirclabError, ValueError):
    """Product of circulants with non-coprime orders is not a circulant."""


class InvalidQuotientError(CirclabError, ValueError):
    """Quotient requested by a subgroup outside the translation kernel."""


class DegreeMismatchError(CirclabError, ValueError):
    """Permutations of different degrees were combined."""


class UndefinedArcTransitivityError(CirclabError, ValueError):
    """Arc-transitivity queried on a graph with no arcs."""


class OracleTooLargeError(CirclabError, RuntimeError):
    """Element enumeration refused: group order exceeds the guard."""


class HypothesisViolationError(CirclabError, ValueError):
    """Lifting hypothesis violated: quotient loses prime divisors."""


class NotAUnitError(CirclabError, ValueError):
    """Multiplier is not coprime to its modulus."""


class NotConnectedError(CirclabError, ValueError):
    """Operation requires a connected circulant."""


class NotArcTransitiveError(CirclabError, ValueError):
    """Operation requires an arc-transitive circulant."""


class ReconstructionError(CirclabError, RuntimeError):
    """Decomposition failed to reconstruct its input; indicates a bug."""
