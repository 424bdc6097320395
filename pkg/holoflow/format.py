"""
Printf-style formatting for catalogue lines

Format codes:
  %p - point
  %x - real part of the point
  %y - imaginary part of the point
  %k - kind with multiplicity (Zero(2), Pole(-1), Essential, ...)
  %m - multiplicity
  %r - residue of the time form (empty when absent)
  %H - hyperbolic sector count
  %E - elliptic sector count
  %P - parabolic sector count
  %c - census pattern

Special:
  %% - literal percent sign

Unknown codes are copied through unchanged.
"""

from typing import Iterable, List, Optional

from .models import LocalClass, is_infinite


DEFAULT_FORMAT = "%k at %p  res=%r  H=%H E=%E P=%P (%c)"


def format_number(value: float, digits: int = 10) -> str:
    text = f"{value:.{digits}g}"
    return "0" if text == "-0" else text


def format_complex(value: Optional[complex], digits: int = 10) -> str:
    """a+bi text with trailing zeros dropped; "infinity" for the point at infinity"""
    if value is None:
        return ""
    if is_infinite(value):
        return "infinity"
    re = format_number(value.real, digits)
    if abs(value.imag) == 0.0:
        return re
    im = format_number(abs(value.imag), digits)
    sign = "-" if value.imag < 0 else "+"
    if abs(value.real) == 0.0:
        return f"{'-' if sign == '-' else ''}{im}i"
    return f"{re}{sign}{im}i"


def format_point_field(code: str, point: LocalClass) -> Optional[str]:
    """
    Value of a single format code

    Returns:
        The text for the code, or None if the code is unknown
    """
    census = point.census
    if code == "p":
        return format_complex(point.point)
    if code == "x":
        return format_number(point.point.real)
    if code == "y":
        return format_number(point.point.imag)
    if code == "k":
        return point.label
    if code == "m":
        return str(point.multiplicity)
    if code == "r":
        return format_complex(point.residue)
    if code == "H":
        return str(census.hyperbolic) if census else ""
    if code == "E":
        return str(census.elliptic) if census else ""
    if code == "P":
        return str(census.parabolic) if census else ""
    if code == "c":
        return census.pattern if census else ""
    return None


def format_point(format_str: str, point: LocalClass) -> str:
    """
    Format one catalogue entry

    Examples:
      "%k at %p" -> "Pole(-1) at 1.570796327"
      "%x,%y,%m" -> "3.141592654,0,2"
    """
    result = []
    i = 0

    while i < len(format_str):
        char = format_str[i]
        if char != "%":
            result.append(char)
            i += 1
            continue

        if i + 1 >= len(format_str):
            # trailing %
            result.append("%")
            break

        code = format_str[i + 1]
        i += 2
        if code == "%":
            result.append("%")
            continue

        value = format_point_field(code, point)
        result.append(value if value is not None else "%" + code)

    return "".join(result)


def format_points(format_str: str, points: Iterable[LocalClass]) -> List[str]:
    return [format_point(format_str, point) for point in points]
