"""Exception hierarchy shared by all modules."""


class JacobiSumsError(Exception):
    """Base class for every error raised by this package."""


class NotPrime(JacobiSumsError, ValueError):
    pass


class ReducibleModulus(JacobiSumsError, ValueError):
    pass


class FieldTooLarge(JacobiSumsError, ValueError):
    pass


class ZeroInverse(JacobiSumsError, ZeroDivisionError):
    pass


class ZeroArgument(JacobiSumsError, ValueError):
    """A multiplicative character was evaluated at 0."""


class BudgetExceeded(JacobiSumsError, RuntimeError):
    """A direct-summation oracle would exceed its term budget."""


class TrivialCharacterInTuple(JacobiSumsError, ValueError):
    pass


class TrivialProduct(JacobiSumsError, ValueError):
    pass


class SOutOfRange(JacobiSumsError, ValueError):
    pass


class DomainError(JacobiSumsError, ValueError):
    pass


class ConfigError(JacobiSumsError, ValueError):
    """Invalid run configuration; ``field`` names the offending key."""

    def __init__(self, message, field=None, line=None):
        self.field = field
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        prefix = f"[{', '.join(where)}] " if where else ""
        super().__init__(prefix + message)


class InvariantViolation(JacobiSumsError, AssertionError):
    pass
