"""
Exception classes for holoflow
"""

from typing import Iterable, Optional


class HoloflowException(Exception):
    """Base exception for all holoflow errors"""
    pass


class ExprSyntaxError(HoloflowException):
    """Expression text does not match the grammar"""

    def __init__(self, message: str, offset: int, expected: Iterable[str] = ()):
        self.offset = offset
        self.expected = sorted(set(expected))
        detail = f" (expected {', '.join(repr(e) for e in self.expected)})" if self.expected else ""
        super().__init__(f"{message} at offset {offset}{detail}")


class UnknownIdentifierError(HoloflowException):
    """Identifier is neither the variable, a constant nor a known function"""

    def __init__(self, name: str, offset: int):
        self.name = name
        self.offset = offset
        super().__init__(f"Unknown identifier '{name}' at offset {offset}")


class NotRationalError(HoloflowException):
    """Expression is not a rational function of its variable"""
    pass


class EvalPoleError(HoloflowException):
    """Division by a value below the pole threshold"""

    def __init__(self, location: complex):
        self.location = location
        super().__init__(f"Pole signaled at z = {location}")


class EvalOverflowError(HoloflowException):
    """Value magnitude exceeded the overflow cap"""

    def __init__(self, location: complex):
        self.location = location
        super().__init__(f"Overflow signaled at z = {location}")


class InvalidBasePointError(HoloflowException):
    """Base point is not a regular point of the field"""
    pass


class OnCircleSingularityError(HoloflowException):
    """Probe circle passes through or too near a zero or pole"""
    pass


class NonIntegerWindingError(HoloflowException):
    """Accumulated argument is not close to an integer multiple of 2*pi"""

    def __init__(self, value: float):
        self.value = value
        super().__init__(f"Winding {value:.6f} is not close to an integer")


class NonConvergentError(HoloflowException):
    """Numerical quadrature did not reach the requested tolerance"""
    pass


class CensusUnstableError(HoloflowException):
    """Sector counts differ between N and 2N seeds"""

    def __init__(self, coarse: tuple, fine: tuple):
        self.coarse = coarse
        self.fine = fine
        super().__init__(f"Sector census unstable: {coarse} vs {fine}")


class PathThroughSingularityError(HoloflowException):
    """Integration path meets a zero of the field"""

    def __init__(self, location: complex):
        self.location = location
        super().__init__(f"Path passes through a singular point near z = {location}")


class PathHitsSingularityError(HoloflowException):
    """Probe path runs into a zero or pole of the field"""

    def __init__(self, location: complex):
        self.location = location
        super().__init__(f"Probe path hits a singular point near z = {location}")


class SeedOutsideDiskError(HoloflowException):
    """Tract seed does not satisfy the disk condition"""
    pass


class RootFindingFailedError(HoloflowException):
    """Polynomial root finder did not converge"""
    pass


class DegenerateRationalError(HoloflowException):
    """Numerator and denominator share a common factor"""

    def __init__(self, resultant: float):
        self.resultant = resultant
        super().__init__(f"Rational function is degenerate (scaled resultant {resultant:.3e})")


class InvalidFamilyMemberError(HoloflowException):
    """Family parameters violate the member invariants"""
    pass


class ReportSchemaError(HoloflowException):
    """Report does not validate against the report schema"""
    pass


class ConfigError(HoloflowException):
    """Configuration file or override is invalid"""

    def __init__(self, message: str, key: Optional[str] = None):
        self.key = key
        super().__init__(message)
