class CointossError(Exception):
    exit_code = 1


class ConfigError(CointossError):
    exit_code = 2


class BudgetError(CointossError):
    exit_code = 3


class EnumerationBudgetError(BudgetError):
    def __init__(self, depth: int, cap: int):
        super().__init__(
            f"Enumerating depth {depth} needs 2^{depth} cylinders; the cap is depth {cap}")
        self.depth = depth
        self.cap = cap


class AnalysisError(CointossError):
    pass


class PreconditionError(AnalysisError, ValueError):
    pass


class DepthError(AnalysisError):
    pass


class ScheduleTooShortError(AnalysisError):
    pass


class GridTooCoarseError(AnalysisError):
    def __init__(self, message: str, cell: tuple[float, float]):
        super().__init__(message)
        self.cell = cell


class NoSignChangeError(AnalysisError):
    pass


class SingularSystemError(AnalysisError):
    def __init__(self, determinant: float):
        super().__init__(
            f"Three-point system is singular (determinant {determinant:.3e})")
        self.determinant = determinant


class PositivityError(AnalysisError):
    def __init__(self, solution):
        super().__init__(
            f"Three-point system solution is not strictly positive: {list(solution)}")
        self.solution = tuple(solution)


class SplitError(AnalysisError):
    pass


class AmbiguousCaseError(AnalysisError):
    pass


class CaseTwoError(AnalysisError):
    pass


class ConstructionError(AnalysisError):
    pass


class LegendreBoundaryWarning(UserWarning):
    """Minimizer of alpha*q + tau(q) sits on the edge of the q grid."""
