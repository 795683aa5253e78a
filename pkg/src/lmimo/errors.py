"""Exception types shared across the package."""


class LmimoError(ValueError):
    """Base class for domain errors raised by this package."""


class ValidationError(LmimoError):
    """A configuration or argument failed validation.

    Carries the full list of diagnostics so callers can report every
    violated field at once.
    """

    def __init__(self, diagnostics):
        if isinstance(diagnostics, str):
            diagnostics = [diagnostics]
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(self.diagnostics))


class ConditionError(LmimoError):
    """A sampling or recovery precondition cannot be met."""


class RankError(LmimoError):
    """Combiner construction hit a singular or ill-conditioned matrix."""


class AnchorError(LmimoError):
    """Constant anchoring failed or was given an inconsistent reference."""
