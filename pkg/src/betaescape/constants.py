"""Named constants of beta-expansion theory at arbitrary precision.

All values are returned as :class:`mpmath.mpf` numbers carrying at least the
requested number of significant bits.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import mpmath
from mpmath import mp

__all__ = [
    "NamedConstant",
    "golden_ratio",
    "thue_morse",
    "komornik_loreti",
    "multinacci",
    "poly_root",
    "poly_eval",
    "named_constant",
]


@dataclass(frozen=True)
class NamedConstant:
    name: str
    value: mpmath.mpf
    defining_relation: str
    precision: int


def poly_eval(coeffs: Sequence[int], x):
    """Horner evaluation; ``coeffs`` run from the leading term down."""
    acc = 0 * x
    for c in coeffs:
        acc = acc * x + c
    return acc


def _sign(v) -> int:
    return (v > 0) - (v < 0)


def poly_root(coeffs: Sequence[int], lo, hi, precision: int) -> mpmath.mpf:
    """Isolate the unique root of an integer polynomial inside ``(lo, hi)``.

    Bisection runs on exact rationals, so the returned value is the midpoint
    of a certified bracket of width below ``2**-(precision + 4)``.

    Raises
    ------
    ValueError
        If the polynomial has no sign change on the interval (no root, or an
        even number of roots counted with multiplicity).
    """
    lo, hi = Fraction(lo), Fraction(hi)
    if not lo < hi:
        raise ValueError(f"empty isolating interval ({lo}, {hi})")
    s_lo, s_hi = _sign(poly_eval(coeffs, lo)), _sign(poly_eval(coeffs, hi))
    if s_lo == 0 or s_hi == 0:
        raise ValueError("root sits on an endpoint of the isolating interval")
    if s_lo == s_hi:
        raise ValueError(f"polynomial has no sign change on ({lo}, {hi})")
    width = Fraction(1, 2 ** (precision + 4))
    while hi - lo > width:
        mid = (lo + hi) / 2
        s_mid = _sign(poly_eval(coeffs, mid))
        if s_mid == 0:
            lo = hi = mid
            break
        if s_mid == s_lo:
            lo = mid
        else:
            hi = mid
    mid = (lo + hi) / 2
    with mp.workprec(precision):
        return mpmath.mpf(mid.numerator) / mid.denominator


def golden_ratio(precision: int = 128) -> mpmath.mpf:
    """Root of ``x**2 - x - 1`` in (1, 2)."""
    return poly_root((1, -1, -1), 1, 2, precision)


def multinacci(k: int, precision: int = 128) -> mpmath.mpf:
    """Root in (1, 2) of ``x**k = x**(k-1) + ... + x + 1``; k=2 is golden, k=3 tribonacci."""
    if k < 2:
        raise ValueError("multinacci order must be at least 2")
    return poly_root((1,) + (-1,) * k, 1, 2, precision)


def thue_morse(n: int) -> int:
    """Thue-Morse bit: parity of the number of ones in the binary form of ``n``."""
    if n < 1:
        raise ValueError("Thue-Morse index starts at 1")
    return n.bit_count() & 1


def _tm_series(x, terms: int):
    # sum_{n=1}^{terms} tau_n x^{-n}, Horner in 1/x
    inv = 1 / x
    acc = 0 * x
    for n in range(terms, 0, -1):
        acc = (acc + thue_morse(n)) * inv
    return acc


def komornik_loreti(precision: int = 128, terms: int | None = None) -> mpmath.mpf:
    """Smallest base admitting a nontrivial unique expansion (~1.787231650).

    Solves ``1 = sum_{n>=1} tau_n x**-n`` on (1.7, 1.8) by bisection. The
    truncated series underestimates the full sum by at most
    ``x**-terms / (x - 1)``, and bisection only moves when the sign of the
    full sum is certain under that bound.
    """
    if precision < 40:
        raise ValueError("precision must be at least 40 bits")
    if terms is None:
        terms = int((precision + 16) / 0.76) + 8  # log2(1.7) > 0.76
    wp = precision + 24
    with mp.workprec(wp):
        lo, hi = mpmath.mpf("1.7"), mpmath.mpf("1.8")
        target = mpmath.ldexp(mpmath.mpf(1), -(precision + 2))
        while hi - lo > target:
            mid = (lo + hi) / 2
            partial = _tm_series(mid, terms) - 1
            tail = mid ** (-terms) / (mid - 1)
            if partial > 0:
                lo = mid
            elif partial + tail < 0:
                hi = mid
            else:
                raise ValueError(
                    f"series tail {mpmath.nstr(tail, 5)} too large to separate the root; "
                    "increase terms"
                )
        value = (lo + hi) / 2
    with mp.workprec(precision):
        return +value


def named_constant(name: str, precision: int = 128) -> NamedConstant:
    """Look up ``golden``, ``kl``, ``tribonacci`` or ``multinacci:k``."""
    if name == "golden":
        return NamedConstant(name, golden_ratio(precision), "x^2 - x - 1 = 0", precision)
    if name == "kl":
        return NamedConstant(
            name, komornik_loreti(precision), "1 = sum_n tau_n x^-n (Thue-Morse)", precision
        )
    if name == "tribonacci":
        return NamedConstant(name, multinacci(3, precision), "x^3 - x^2 - x - 1 = 0", precision)
    if name.startswith("multinacci:"):
        k = int(name.split(":", 1)[1])
        return NamedConstant(
            name, multinacci(k, precision), f"x^{k} = x^{k-1} + ... + 1", precision
        )
    raise ValueError(f"unknown constant {name!r}")
