"""Plain-text cost tables.

Format: the first line holds the domain labels, tab separated; each following
line holds one row of costs.  Finite costs are exact decimals when they
terminate and ``p/q`` otherwise; forbidden changes are the literal ``inf``.
Labels are written with ``repr`` (``⌀`` for the removal sentinel) and read back
with :func:`ast.literal_eval`, so parsing reproduces the table exactly.
"""
from __future__ import annotations

import ast
from decimal import Decimal
from fractions import Fraction

from ..probkit.types import NULL, Domain
from .function import INF, CostFunction

_NULL_TOKEN = "⌀"


def _format_label(label) -> str:
    if label is NULL:
        return _NULL_TOKEN
    text = repr(label)
    if "\t" in text or "\n" in text:
        raise ValueError(f"label {label!r} cannot be written to a table")
    return text


def _parse_label(token: str):
    if token == _NULL_TOKEN:
        return NULL
    try:
        return ast.literal_eval(token)
    except (ValueError, SyntaxError):
        return token


def _format_cost(v) -> str:
    if v is INF:
        return "inf"
    frac = Fraction(v)
    den, twos, fives = frac.denominator, 0, 0
    while den % 2 == 0:
        den, twos = den // 2, twos + 1
    while den % 5 == 0:
        den, fives = den // 5, fives + 1
    if den != 1:
        return f"{frac.numerator}/{frac.denominator}"
    # Exact digits by integer scaling; Decimal division would round at its context precision.
    places = max(twos, fives)
    digits = str(frac.numerator * 10**places // frac.denominator).rjust(places + 1, "0")
    if not places:
        return digits
    text = f"{digits[:-places]}.{digits[-places:]}".rstrip("0").rstrip(".")
    return text


def _parse_cost(token: str):
    token = token.strip()
    if token.lower() == "inf":
        return INF
    if "/" in token:
        return Fraction(token)
    return Fraction(Decimal(token))


def dumps(rho: CostFunction) -> str:
    lines = ["\t".join(_format_label(x) for x in rho.domain)]
    for row in rho.table:
        lines.append("\t".join(_format_cost(v) for v in row))
    return "\n".join(lines) + "\n"


def loads(text: str) -> CostFunction:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty cost table")
    labels = [_parse_label(tok) for tok in lines[0].split("\t")]
    augmented = bool(labels) and labels[-1] is NULL
    domain = Domain(tuple(labels), augmented=augmented)
    rows = [[_parse_cost(tok) for tok in ln.split("\t")] for ln in lines[1:]]
    return CostFunction(domain, rows)
