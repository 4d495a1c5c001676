"""Exception hierarchy.

Everything raised on purpose by the package derives from ``MoeaWstError``.
``ConfigError`` marks a bad experiment configuration; the rest describe bad
input data or arguments and derive from ``DataError``.
"""


class MoeaWstError(Exception):
    pass


class ConfigError(MoeaWstError):
    def __init__(self, field, reason):
        self.field = field
        self.reason = reason
        super().__init__(f"{field}: {reason}")


class DataError(MoeaWstError, ValueError):
    pass


class ParseError(DataError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)


# optimal transport
class EmptyHistogramError(DataError):
    pass


class MassMismatchError(DataError):
    pass


class DimensionError(DataError):
    pass


class SupportMismatchError(DataError):
    pass


class EmptyInputError(DataError):
    pass


class KTooLargeError(DataError):
    pass


# graphs
class SelfLoopError(DataError):
    pass


class DuplicateEdgeError(DataError):
    pass


class NodeOutOfRangeError(DataError):
    pass


class EmptyGraphError(DataError):
    pass


class UnknownEdgeError(DataError):
    pass


# multi-objective machinery
class DimensionMismatchError(DataError):
    pass


class UnevaluatedIndividualError(DataError):
    pass


class UnsupportedDimensionError(DataError):
    pass


class EmptyFrontError(DataError):
    pass


class NTooSmallError(DataError):
    pass


class InfeasibleParentError(DataError):
    pass


class LengthMismatchError(DataError):
    pass


class SamplingExhaustedError(MoeaWstError):
    pass


# sensor placement
class NonpositiveTravelTimeError(DataError):
    pass


class NegativeTimeError(DataError):
    pass


class TimeBeyondHorizonError(DataError):
    pass


class ShapeMismatchError(DataError):
    pass


class BudgetTooLargeError(DataError):
    pass


# recommendation
class RatingOutOfRangeError(DataError):
    pass


class UnratedRecommendationError(DataError):
    pass


class UserTooSparseError(DataError):
    pass
