"""Exception hierarchy shared by all modules.

The command line layer maps these onto process exit codes, so library code
should raise the most specific class that applies.
"""


class GietError(Exception):
    """Base class for all errors raised by this package."""


class MalformedCombinatorics(GietError):
    """Input maps are not bijections onto {1..d} (distinct from reducibility)."""


class ReducibleCombinatorics(GietError):
    """Combinatorial data is a bijection pair but fails irreducibility."""


class HypothesisError(GietError):
    """A standing hypothesis (genus one, zero mean nonlinearity, admissibility,
    k-boundedness, ...) is violated by the input."""


class ConnectionSuspected(HypothesisError):
    """A renormalization step could not decide its type because the two
    competing lengths agree to within the connection guard."""


class PrecisionExhausted(GietError):
    """The working interval has shrunk below the precision guard."""

    def __init__(self, message, safe_depth=None):
        super().__init__(message)
        self.safe_depth = safe_depth


class CombinatoricsMismatch(GietError):
    """Two maps that were required to share a renormalization path diverged."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class ConvergenceError(GietError):
    """An iterative scheme failed to stabilize within its budget."""
