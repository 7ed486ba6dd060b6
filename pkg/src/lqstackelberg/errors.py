"""Exception hierarchy shared by the solvers."""


class StackelbergError(Exception):
    """Base class for every error raised by this package."""


class ParseError(StackelbergError):
    pass


class DimensionError(StackelbergError):
    pass


class DefinitenessError(StackelbergError):
    pass


class StageOutOfRange(StackelbergError, IndexError):
    pass


class SolverError(StackelbergError):
    """A backward recursion hit a violated hypothesis at some stage."""

    def __init__(self, message, stage=None):
        self.stage = stage
        if stage is not None:
            message = f"stage {stage}: {message}"
        super().__init__(message)


class GammaNotPD(SolverError):
    pass


class GammaLNotPD(SolverError):
    pass


class DeltaSingular(SolverError):
    pass


class LeaderStagePDFailure(SolverError):
    pass


class NonFiniteValue(SolverError):
    pass


class SearchBudgetExceeded(StackelbergError):
    pass


class DimensionTooLarge(StackelbergError):
    pass
