"""Exception types raised across the package."""


class ArgumentError(ValueError):
    """Input outside the documented domain of an operation."""


class PreconditionError(ArgumentError):
    """Data violates a hypothesis the caller must guarantee."""


class SamplingError(RuntimeError):
    def __init__(self, region, attempts, accepted):
        self.region = region
        self.attempts = attempts
        self.accepted = accepted
        rate = accepted / attempts if attempts else 0.0
        super().__init__(
            f"rejection sampling failed for {region!r}: "
            f"{accepted} accepted out of {attempts} attempts (rate {rate:.3g})"
        )


class ConvergenceError(RuntimeError):
    def __init__(self, message, last=None, previous=None):
        self.last = last
        self.previous = previous
        super().__init__(f"{message} (last={last!r}, previous={previous!r})")


class DegeneratePointError(ArithmeticError):
    """Jacobian too close to singular for a dilatation estimate."""
