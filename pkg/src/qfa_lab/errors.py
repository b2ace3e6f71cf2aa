"""Exception hierarchy shared by every module."""


class QfaLabError(Exception):
    """Base class for all library errors."""


class DimensionError(QfaLabError, ValueError):
    pass


class WellformednessError(QfaLabError, ValueError):
    """A machine or operator violates its model's norm-preservation condition."""


class InputError(QfaLabError, ValueError):
    """Input string or argument outside the machine's domain."""


class ConstructionError(QfaLabError, RuntimeError):
    pass


class ConservationError(QfaLabError, AssertionError):
    """Probability mass was created or lost during a halting simulation."""


class AmpSyntaxError(QfaLabError, ValueError):
    def __init__(self, message: str, offset: int, text: str = ""):
        self.offset = offset
        self.text = text
        super().__init__(f"{message} at offset {offset}" + (f" in {text!r}" if text else ""))


class AmpEvaluationError(QfaLabError, ArithmeticError):
    pass


class MachineFileError(QfaLabError, ValueError):
    """Malformed machine definition document."""
