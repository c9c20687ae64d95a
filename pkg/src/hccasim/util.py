"""Small shared helpers."""

from fractions import Fraction


def exact(x) -> Fraction:
    """Fraction from x, reading floats through their decimal string form.

    Fraction(0.04) picks up binary representation error; Fraction("0.04")
    does not. Times and rates coming from config files pass through here.
    """
    if isinstance(x, float):
        return Fraction(str(x))
    return Fraction(x)
