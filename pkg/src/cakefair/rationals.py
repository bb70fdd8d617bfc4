"""Parsing and formatting of exact rationals at the I/O boundary.

All internal arithmetic uses fractions.Fraction; decimal strings appear only
in reports, rounded to 12 significant digits.
"""

import decimal
from fractions import Fraction

from .errors import InputError

REPORT_DIGITS = 12


def parse_rational(value, where="value"):
    """Parse "p/q", an integer, or a decimal literal into an exact Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise InputError(f"{where}: cannot parse rational {value!r}: {exc}") from exc
    raise InputError(f"{where}: expected a rational string or integer, got {type(value).__name__}")


def rational_str(x):
    """Canonical "p/q" form (denominator always shown, even for integers)."""
    f = Fraction(x)
    return f"{f.numerator}/{f.denominator}"


def decimal_str(x, digits=REPORT_DIGITS):
    """Round a Fraction to `digits` significant digits, exactly (no float detour)."""
    f = Fraction(x)
    if f == 0:
        return "0"
    with decimal.localcontext() as ctx:
        ctx.prec = digits
        d = decimal.Decimal(f.numerator) / decimal.Decimal(f.denominator)
    return format(d.normalize(), "f")
