"""Exception hierarchy shared by every module of the toolkit."""


class TimeScaleError(Exception):
    """Base class for all library errors."""


class PointNotInScale(TimeScaleError):
    pass


class WindowEdge(TimeScaleError):
    pass


class ReversedBounds(TimeScaleError):
    pass


class NonFiniteValue(TimeScaleError):
    pass


class QuadratureFailure(TimeScaleError):
    pass


class IntegrationFailure(TimeScaleError):
    pass


class OutOfDomain(TimeScaleError):
    pass


class IterationCapExceeded(TimeScaleError):
    pass


class RegressivityViolation(TimeScaleError):
    pass


class OmegaOutOfStrip(TimeScaleError):
    pass


class SingularMatrix(TimeScaleError):
    pass


class ClusteringAmbiguous(TimeScaleError):
    pass


class DegenerateMultiplier(TimeScaleError):
    pass


class RootFindFailure(TimeScaleError):
    pass


class ResonantSystem(TimeScaleError):
    pass


class EmptyHorizon(TimeScaleError):
    pass


class ConfigError(TimeScaleError):
    pass


class ExprError(TimeScaleError):
    """Base class for expression-language errors."""


class ExprSyntaxError(ExprError):
    def __init__(self, position: int, expected: str):
        self.position = position
        self.expected = expected
        super().__init__(f"syntax error at position {position}: expected {expected}")


class UnknownFunction(ExprError):
    def __init__(self, name: str, position: int = -1):
        self.name = name
        self.position = position
        super().__init__(f"unknown function {name!r}")


class UnboundVariable(ExprError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"unbound variable {name!r}")


class DomainError(ExprError):
    pass
