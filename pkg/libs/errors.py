"""
Excepciones de spreadlab.

Cada clase lleva el codigo de salida que usa la linea de comandos:
1 entrada invalida, 2 presupuesto excedido, 3 fallo de postcondicion.
"""


class SpreadLabError(Exception):
    """Base de todos los errores del laboratorio."""
    exit_code = 3


class RejectedInputError(SpreadLabError, ValueError):
    """Input fails validation (dimensions, containment, malformed files, missing seed)."""
    exit_code = 1


class ConditioningError(RejectedInputError):
    """The conditioning event has zero mass."""
    exit_code = 1


class NoSquaresError(ConditioningError):
    """The diagonal product contains no square."""
    exit_code = 1


class BudgetExceededError(SpreadLabError):
    """An exact computation would exceed its configured budget."""
    exit_code = 2

    def __init__(self, what, needed, budget, advice=''):
        self.what = what
        self.needed = needed
        self.budget = budget
        self.advice = advice
        message = f"{what}: needs {needed} > budget {budget}"
        if advice:
            message += f" ({advice})"
        super().__init__(message)


class IncompleteDecompositionError(SpreadLabError):
    """Uniformization stopped before reaching its coverage target."""
    exit_code = 3

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class PostconditionError(SpreadLabError):
    """A mechanical verification failed."""
    exit_code = 3

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report
