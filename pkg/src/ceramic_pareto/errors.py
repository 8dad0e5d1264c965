"""Exception types raised by the shape-optimization pipeline."""


class ShapeError(Exception):
    """Base class for all package errors."""


class NonPositiveThickness(ShapeError):
    pass


class DegenerateCell(ShapeError):
    pass


class DegenerateElement(ShapeError):
    pass


class OutOfDomain(ShapeError):
    pass


class RankDeficient(ShapeError):
    pass


class SolveFailure(ShapeError):
    pass


class NonIntegerM(ShapeError):
    pass


class DegenerateFacet(ShapeError):
    pass


class StepFailure(ShapeError):
    pass


class AllRatiosUndefined(ShapeError):
    pass


class ConfigError(ShapeError):
    pass


class ParseError(ConfigError):
    pass


class ValidationError(ConfigError):
    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key
