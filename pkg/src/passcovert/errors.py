"""Exception hierarchy shared by all passcovert modules."""


class PassCovertError(Exception):
    """Base class for every error raised by this package."""


class OutOfWaveguide(PassCovertError, ValueError):
    pass


class DegenerateDistance(PassCovertError, ValueError):
    pass


class LengthMismatch(PassCovertError, ValueError):
    pass


class ParamOutOfRange(PassCovertError, ValueError):
    pass


class DegenerateJamming(PassCovertError, ValueError):
    """The jamming span P_J_max * A_J is zero, so the H0 statistic is deterministic."""


class ProbOutOfRange(PassCovertError, ValueError):
    pass


class IndexOutOfRange(PassCovertError, IndexError):
    pass


class EmptyWardenSet(PassCovertError, ValueError):
    pass


class HeterogeneousSlope(PassCovertError, ValueError):
    """Closed-form piecewise DEP needs a common jamming span and noise power."""


class SelectorInvalid(PassCovertError, ValueError):
    pass


class NonFiniteGradient(PassCovertError, FloatingPointError):
    pass


class InfeasibleGeometry(PassCovertError, ValueError):
    pass


class NoFeasiblePower(PassCovertError, ValueError):
    pass


class NoFeasibleGridPoint(PassCovertError, ValueError):
    pass


class RejectionBudgetExceeded(PassCovertError, RuntimeError):
    pass


class TooManyWardens(PassCovertError, ValueError):
    pass


class ConfigError(PassCovertError, ValueError):
    """Base for scenario-file problems (CLI exit code 2)."""


class ParseError(ConfigError):
    def __init__(self, message, line=None, field=None):
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field}")
        prefix = f"[{', '.join(where)}] " if where else ""
        super().__init__(prefix + message)


class ValidationError(ConfigError):
    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")
