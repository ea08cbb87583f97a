"""Exception hierarchy shared by all modules."""

import math


class NoisyOpsError(Exception):
    pass


class InvalidSpectrum(NoisyOpsError, ValueError):
    pass


class DimensionMismatch(NoisyOpsError, ValueError):
    pass


class NotHermitian(NoisyOpsError, ValueError):
    pass


class NotPositive(NoisyOpsError, ValueError):
    pass


class NotMajorized(NoisyOpsError, ValueError):
    """Raised when the target is not more mixed than the source.

    ``k`` is the first (1-based) Ky Fan index whose partial sum is violated.
    """

    def __init__(self, k, message=None):
        self.k = k
        super().__init__(message or f"target is not more mixed than source (violated at k={k})")


class DecompositionStalled(NoisyOpsError, RuntimeError):
    pass


class AncillaTooSmall(NoisyOpsError, ValueError):
    pass


class InsufficientN(NoisyOpsError, ValueError):
    """Typical-set weight below ``1 - epsilon``; ``required_n`` is an advisory threshold."""

    def __init__(self, n, weight, epsilon, required_n=None):
        self.n = n
        self.weight = weight
        self.epsilon = epsilon
        self.required_n = required_n
        hint = f"; try n >= {required_n}" if required_n is not None else ""
        super().__init__(
            f"typical weight {weight:.6g} < 1 - epsilon = {1 - epsilon:.6g} at n={n}{hint}"
        )


class TargetHasNoInformation(NoisyOpsError, ValueError):
    """The target carries no information, so the conversion rate diverges."""

    rate = math.inf


class OutOfRange(NoisyOpsError, ValueError):
    pass
