"""Published multiplication tables used as fixed expectations by the reproductions."""
from __future__ import annotations

import re
from fractions import Fraction

AFFR_LABELS = ("e1-", "e2-", "C3", "C4", "C5", "C6")

# row X, column Y holds X.Y = nabla_X Y
AFFR_TABLE = (
    ("e1- + C5", "C4", "0", "C4", "2C5", "2C6"),
    ("e2- + C4", "C3", "0", "C3", "2C4", "2e1- - 2C5"),
    ("2C3", "0", "0", "0", "2C3", "2e2- - 2C4"),
    ("2C4", "0", "0", "0", "2C4", "2e1- - 2C5"),
    ("2C5", "0", "0", "0", "2C5", "2C6"),
    ("C6", "C5", "0", "C5", "0", "0"),
)

AFFR_FIELDS = {
    "e1-": ("x", "y"),
    "e2-": ("0", "1"),
    "C3": ("1/x", "0"),
    "C4": ("y/x", "0"),
    "C5": ("x + y^2/x", "0"),
    "C6": ("-x*y - y^3/x", "x^2 + y^2"),
}

AFFR_ENVELOPE = ("e1-", "e2-", "C3", "C4", "C5")

GENERIC_LABELS = ("C1", "C2", "C3", "C4")


def generic_fields(alpha: int):
    return {
        "C1": ("x", "y"),
        "C2": ("0", "1"),
        "C3": ("0", "y"),
        "C4": ("0", f"(x^{alpha} - 1)/{alpha}"),
    }


def generic_table(alpha):
    """Coordinates in (C1, C2, C3, C4) of the family's table at a given alpha."""
    a = Fraction(alpha)
    z = (0, 0, 0, 0)
    return (
        ((a, 0, 1 - a, 0), z, (0, 0, 1, 0), (0, 1, 0, a)),
        ((0, 1, 0, 0), z, (0, 1, 0, 0), z),
        ((0, 0, 1, 0), z, (0, 0, 1, 0), z),
        ((0, 0, 0, 1), z, (0, 0, 0, 1), z),
    )


_TERM = re.compile(r"(-?)(\d+(?:/\d+)?|\(\d+/\d+\))?(.+)")


def parse_combination(text: str, labels) -> tuple:
    """'2e1- - 2C5' -> coordinate tuple over ``labels``; terms and signs are space separated."""
    vec = [Fraction(0)] * len(labels)
    tokens = text.split()
    if tokens == ["0"]:
        return tuple(vec)
    sign = 1
    for tok in tokens:
        if tok in "+-":
            sign = -1 if tok == "-" else 1
            continue
        neg, coeff, label = _TERM.fullmatch(tok).groups()
        c = Fraction(coeff.strip("()")) if coeff else Fraction(1)
        if label not in labels:
            raise ValueError(f"unknown label {label!r} in {text!r}")
        vec[labels.index(label)] += -sign * c if neg else sign * c
        sign = 1
    return tuple(vec)


def affr_table_coordinates():
    return tuple(tuple(parse_combination(e, AFFR_LABELS) for e in row) for row in AFFR_TABLE)
