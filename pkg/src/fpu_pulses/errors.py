"""Exception hierarchy shared by all modules."""


class FPUError(Exception):
    """Base class for every error raised by the toolkit."""


class NumericalFailure(FPUError):
    """A numerical procedure failed; the CLI maps these to exit code 2."""


class NoConvergence(NumericalFailure):
    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = list(trace) if trace is not None else []


class BracketFailure(NumericalFailure):
    pass


class ContourThroughRoot(NumericalFailure):
    pass


class BlowUp(NumericalFailure):
    pass


class ExistenceConditionViolated(FPUError):
    """The potential coefficients fail the sign condition."""


class ParameterSignError(FPUError, ValueError):
    pass


class GridTooCoarse(FPUError, ValueError):
    pass


class NonPowerOfTwo(FPUError, ValueError):
    pass


class WindowTooSmall(FPUError, ValueError):
    pass


class TailNotResolved(FPUError, ValueError):
    pass


class DomainTooSmall(FPUError, ValueError):
    pass


class ConfigError(FPUError, ValueError):
    """Invalid experiment configuration (usage error)."""
