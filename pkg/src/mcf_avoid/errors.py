"""Exception types raised across the package."""


class McfAvoidError(Exception):
    """Base class for all package errors."""


class DomainOutsideChart(McfAvoidError):
    pass


class InterfaceNearBoundary(McfAvoidError):
    pass


class EmptyRegion(McfAvoidError):
    pass


class EmptyOffsetRegion(McfAvoidError):
    pass


class NoBandNodes(McfAvoidError):
    pass


class MissingBoundaryClass(McfAvoidError):
    pass


class SolverDiverged(McfAvoidError):
    pass


class NoRegularValue(McfAvoidError):
    pass


class ContainmentViolated(McfAvoidError):
    def __init__(self, message, nodes=()):
        super().__init__(message)
        self.nodes = list(nodes)


class CflViolated(McfAvoidError):
    pass


class LambdaNotBelowRicciBound(McfAvoidError):
    pass


class TimeGridMismatch(McfAvoidError):
    pass


class ZeroInitialDistance(McfAvoidError):
    pass


class UnsupportedKind(McfAvoidError):
    pass


class ParseError(McfAvoidError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ValidationError(McfAvoidError):
    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key
