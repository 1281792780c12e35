"""Exception hierarchy shared by every module."""


class LdpcStoreError(Exception):
    """Base class for all library errors."""


class GraphError(LdpcStoreError, ValueError):
    pass


class IndexOutOfRange(GraphError):
    pass


class DuplicateEdge(GraphError):
    pass


class EmptyGraph(GraphError):
    pass


class IsolatedNode(GraphError):
    pass


class ZeroDenominator(LdpcStoreError, ZeroDivisionError):
    pass


class InvalidRate(LdpcStoreError, ValueError):
    pass


class InfeasibleSpec(LdpcStoreError, ValueError):
    pass


class BudgetExceeded(LdpcStoreError, RuntimeError):
    pass


class DegenerateRatio(LdpcStoreError, ArithmeticError):
    pass


class NonMonotonePredicate(LdpcStoreError, RuntimeError):
    pass


class Infeasible(LdpcStoreError, ValueError):
    """LP feasibility failed; ``violation`` carries the worst constraint."""

    def __init__(self, message, violation=None):
        super().__init__(message)
        self.violation = violation


class RateImpossible(LdpcStoreError, ValueError):
    pass


class InvalidStoppingIndex(LdpcStoreError, ValueError):
    pass


class SingularSystem(LdpcStoreError, ArithmeticError):
    pass


class ConfigError(LdpcStoreError, ValueError):
    pass


class MissingGraphFile(LdpcStoreError, FileNotFoundError):
    pass
