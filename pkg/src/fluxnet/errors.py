"""Exception hierarchy shared by all modules."""


class FluxnetError(Exception):
    """Base class for every error raised by fluxnet."""


class NetworkError(FluxnetError, ValueError):
    """Invalid network construction (duplicate species, negative rates, shape mismatch)."""


class ParseError(FluxnetError, ValueError):
    """Raised by the DSL parser. ``diagnostics`` holds ``(line, column, message)`` triples."""

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        msg = "; ".join(f"{ln}:{col}: {m}" for ln, col, m in self.diagnostics)
        super().__init__(msg or "parse error")


class NoPositiveEquilibrium(FluxnetError):
    pass


class GradientUndefined(FluxnetError):
    pass


class StepSizeTooLarge(FluxnetError):
    pass


class WeakDBViolated(FluxnetError):
    """Forces are undefined: some pair has exactly one vanishing rate.

    ``pairs`` lists the offending forward-reaction indices, ``condition`` names
    which compatibility failed (e.g. ``"kappa ~ kappa_bw"``).
    """

    def __init__(self, pairs, condition="kappa ~ kappa_bw"):
        self.pairs = list(pairs)
        self.condition = condition
        super().__init__(f"weak detailed balance violated ({condition}) at pairs {self.pairs}")


class ExplosionGuard(FluxnetError):
    pass


class NegativeCountBug(FluxnetError, AssertionError):
    pass


class ConditionViolated(FluxnetError):
    def __init__(self, interval, pair, message=""):
        self.interval = interval
        self.pair = pair
        super().__init__(message or f"precondition violated on interval {interval}, pair {pair}")


class EndpointEnergyInfinite(FluxnetError):
    pass


class DimensionMismatch(FluxnetError, ValueError):
    pass


class BoundaryStart(FluxnetError, ValueError):
    """Path starts with a vanishing concentration; FIR checks refuse such paths."""
