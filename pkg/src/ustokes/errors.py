"""Exception hierarchy shared by all modules."""


class StokesError(Exception):
    """Base class for every error raised by this package."""


class InvalidIndex(StokesError, ValueError):
    pass


class DomainError(StokesError, ValueError):
    pass


class UnsupportedOperation(StokesError):
    """An exact operation whose result leaves the mode family."""


class SpecError(StokesError):
    def __init__(self, message, equation=None, residual=None):
        super().__init__(message)
        self.equation = equation
        self.residual = residual


class ResonanceError(StokesError):
    pass


class PreconditionError(StokesError):
    pass


class MonopoleError(StokesError):
    pass


class QuadratureBudgetError(StokesError):
    pass


class GridTooCoarse(StokesError):
    pass


class NotDivergenceFree(StokesError):
    pass


class MonopoleFluxError(StokesError):
    def __init__(self, message, flux=None):
        super().__init__(message)
        self.flux = flux


class ExtrapolationError(StokesError):
    pass


class PathDependenceError(StokesError):
    def __init__(self, message, loop_integral=None, time=None, spread=None):
        super().__init__(message)
        self.loop_integral = loop_integral
        self.time = time
        self.spread = spread
