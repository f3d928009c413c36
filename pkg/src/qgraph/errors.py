"""Exception hierarchy.

Input problems derive from :class:`InputError` (CLI exit code 2), numerical
failures from :class:`NumericalError` (CLI exit code 3).
"""


class QGraphError(Exception):
    """Base class for all package errors."""


class InputError(QGraphError, ValueError):
    """Malformed graph, boundary condition or argument."""


class GraphError(InputError):
    pass


class ParseError(InputError):
    def __init__(self, message, line=None, field=None):
        self.line = line
        self.field = field
        prefix = []
        if line is not None:
            prefix.append(f"line {line}")
        if field:
            prefix.append(field)
        super().__init__(": ".join(prefix + [message]) if prefix else message)


class NumericalError(QGraphError, ArithmeticError):
    """A quantity could not be evaluated reliably."""


class ResonanceError(NumericalError):
    def __init__(self, message, bond=None):
        self.bond = bond
        super().__init__(message)


class DirichletResonance(ResonanceError):
    """The bond has a Dirichlet eigenvalue at -gamma: the f basis is undefined."""


class NeumannResonance(ResonanceError):
    """The bond has a Neumann eigenvalue at -gamma: the g basis is undefined."""


class SingularMatrixError(NumericalError):
    def __init__(self, message, vertex=None):
        self.vertex = vertex
        super().__init__(message)


class IntegrationError(NumericalError):
    pass


class OrbitExplosionError(NumericalError):
    pass


class BracketingError(NumericalError):
    def __init__(self, message, interval=None):
        self.interval = interval
        super().__init__(message)
