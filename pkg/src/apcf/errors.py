"""Exception hierarchy shared by all apcf modules."""


class APCFError(ValueError):
    """Base class for domain errors (CLI exit status 1)."""


# continued fractions
class EmptySequence(APCFError):
    pass


class NonPositiveDigit(APCFError):
    pass


class OutOfDomain(APCFError):
    pass


class IndexOutOfRange(APCFError):
    pass


# digit sequences / blocks
class NotStrictlyIncreasing(APCFError):
    pass


class SpecConstraintViolated(APCFError):
    pass


class ScheduleTooDense(APCFError):
    pass


class ScheduleInfeasible(APCFError):
    pass


# measures
class ZeroMeasure(APCFError):
    pass


class RadiusOutOfRange(APCFError):
    pass


class NeighborhoodEscape(APCFError):
    """The ball left the parent cylinder, so the local count is not finite-local."""


# covering side
class ParameterOutOfRange(APCFError):
    pass


class NoCertificate(APCFError):
    def __init__(self, message, attempt=None):
        super().__init__(message)
        self.attempt = attempt


class StageBoundViolated(APCFError):
    def __init__(self, message, stage=None, report=None):
        super().__init__(message)
        self.stage = stage
        self.report = report


# sequence specs
class ParseError(APCFError):
    def __init__(self, text, position, expected, found):
        self.text = text
        self.position = position
        self.expected = expected
        self.found = found
        super().__init__(
            f"at offset {position}: expected {expected}, found {found!r}"
        )


class ValidationError(APCFError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class EvaluationError(APCFError):
    pass


class NonIntegerValue(EvaluationError):
    pass


class HorizonExceeded(EvaluationError):
    pass
