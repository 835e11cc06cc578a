"""Exception hierarchy.

Errors split into two families so the CLI can map them onto exit codes:
``Obstruction`` subclasses are mathematical outcomes (the input is valid
but the requested object does not exist), everything else is a usage or
consistency failure.
"""


class FirstIntError(Exception):
    """Base class for all package errors."""


class Obstruction(FirstIntError):
    """A mathematical obstruction: valid input, negative answer."""


# algebra
class DimensionMismatch(FirstIntError):
    pass


class ValuationTooLow(FirstIntError):
    pass


class DegreeOutOfRange(FirstIntError):
    pass


class UndecidedSign(FirstIntError):
    """A ball straddles zero at the current working precision."""


class PrecisionExhausted(FirstIntError):
    """Sign still undecided after doubling precision up to the cap."""


# spectral
class NonRationalEigenvalues(FirstIntError):
    pass


class ResonantSpectrum(Obstruction):
    pass


# homological
class NotJordanForm(FirstIntError):
    pass


class ZeroDivisor(Obstruction):
    pass


class BadRhs(FirstIntError):
    pass


# integralforge
class NotStraightened(FirstIntError):
    pass


class ResonantTail(Obstruction):
    pass


# locus
class SingularB(Obstruction):
    pass


class CurveNotInvariant(Obstruction):
    pass


class IsolatedSingularPoint(Obstruction):
    """Raised by pipelines when f1 does not vanish on the singular curve."""

    def __init__(self, degree, coefficient):
        super().__init__(
            f"singular point is isolated: f1(x1, phi(x1)) has nonzero "
            f"coefficient {coefficient} at degree {degree}"
        )
        self.degree = degree
        self.coefficient = coefficient


# smalldiv
class ScheduleOverflow(FirstIntError):
    pass


# dynlab
class RadiusExceeded(FirstIntError):
    def __init__(self, step, norm, radius):
        super().__init__(f"trajectory left trust region at step {step}: |x| = {norm:.3e} > {radius:.3e}")
        self.step = step
        self.norm = norm
        self.radius = radius


# cli
class SystemSyntaxError(FirstIntError):
    def __init__(self, message, line, column):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class ValuationError(FirstIntError):
    pass
