"""Exception and warning classes shared by all pdext modules."""


class PdextError(Exception):
    """Base class for all errors raised by pdext."""


class InvalidMeasure(PdextError, ValueError):
    pass


class NegativeDensity(PdextError, ValueError):
    """A Polya density value fell below the clamp tolerance."""

    def __init__(self, message, index=None, value=None):
        super().__init__(message)
        self.index = index
        self.value = value


class OutOfDomain(PdextError, ValueError):
    """A kernel was evaluated outside the open difference set."""

    def __init__(self, message, points=None):
        super().__init__(message)
        self.points = points


class DomainNotInterval(PdextError, ValueError):
    pass


class NotConvex(PdextError, ValueError):
    def __init__(self, message, triple=None):
        super().__init__(message)
        self.triple = triple


class NotDecreasing(PdextError, ValueError):
    def __init__(self, message, triple=None):
        super().__init__(message)
        self.triple = triple


class TangentHorizontal(PdextError, ValueError):
    pass


class NoBackingMeasure(PdextError, ValueError):
    pass


class NotAnExtension(PdextError, ValueError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class NotPSD(PdextError, ValueError):
    def __init__(self, message, min_eigenvalue=None):
        super().__init__(message)
        self.min_eigenvalue = min_eigenvalue


class NotCND(PdextError, ValueError):
    pass


class TooFewPaths(PdextError, ValueError):
    pass


class NonUniformGrid(PdextError, ValueError):
    pass


class AsymmetricData(PdextError, ValueError):
    def __init__(self, message, defect=None):
        super().__init__(message)
        self.defect = defect


class ConfigError(PdextError, ValueError):
    """Configuration could not be parsed or validated."""


class IllConditioned(UserWarning):
    """Gram matrix condition number exceeded the reporting threshold."""


class RankDeficient(UserWarning):
    """The eigenvalue cutoff discarded part of a Gram matrix."""


class MeasureShapeMismatch(UserWarning):
    """Two backing measures could not be combined; the measure was dropped."""
