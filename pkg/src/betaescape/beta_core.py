"""Base parameters, the greedy/lazy/stuck maps, codings and hole geometry.

A base is a :class:`BetaParam`. Decimal and fractional descriptors are kept
as exact rationals (``BetaParam.exact``) so that orbit work downstream can be
done without rounding; every base also carries an :mod:`mpmath` value at its
working precision.

Point functions accept ints, :class:`fractions.Fraction`, floats or mpmath
numbers. Arithmetic is exact when both the base and the point are rational,
and otherwise runs in binary floating point at ``beta.precision`` bits.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, NamedTuple, Sequence

import mpmath
from mpmath import mp

from . import constants

__all__ = [
    "BetaSpecError",
    "BetaParam",
    "HoleGeometry",
    "DigitWord",
    "UnivoqueResult",
    "make_beta",
    "hole",
    "greedy_step",
    "lazy_step",
    "stuck_step",
    "greedy_coding",
    "project",
    "univoque_test",
    "default_margin",
    "lex_leq",
]

DEFAULT_PRECISION = 128


class BetaSpecError(ValueError):
    """Malformed or out-of-range base descriptor."""


@dataclass(frozen=True)
class BetaParam:
    """A base ``1 < beta <= 2`` together with the descriptor that produced it.

    ``value`` is an mpf with ``precision`` significant bits. ``exact`` is the
    rational value when the descriptor is a decimal or ``p/q`` literal.
    ``poly``/``interval`` record a polynomial-root descriptor.
    """

    value: mpmath.mpf
    spec: str
    precision: int
    exact: Fraction | None = None
    poly: tuple[int, ...] | None = None
    interval: tuple[Fraction, Fraction] | None = field(default=None)

    @property
    def is_exact(self) -> bool:
        return self.exact is not None

    @property
    def num(self):
        """The base in the arithmetic used for orbit work."""
        return self.exact if self.exact is not None else self.value

    def at_precision(self, precision: int) -> "BetaParam":
        return make_beta(self.spec, precision)

    def __float__(self) -> float:
        return float(self.value)

    def __str__(self) -> str:
        return self.spec


def default_margin(precision: int) -> mpmath.mpf:
    """Boundary margin ``2**(-precision/2)``."""
    return mpmath.ldexp(mpmath.mpf(1), -(precision // 2))


_DECIMAL = re.compile(r"^[+]?(\d+(\.\d*)?|\.\d+)([eE][-+]?\d+)?$")
_RATIO = re.compile(r"^\d+/\d+$")
_NAMED = re.compile(r"^(golden|kl|tribonacci|multinacci:\d+)(?:([+-])(\d+(?:\.\d*)?|\.\d+)([eE][-+]?\d+)?)?$")
_POLY = re.compile(r"^poly:(?P<expr>.+?)\s+in\s+\(\s*(?P<lo>[^,]+?)\s*,\s*(?P<hi>[^)]+?)\s*\)$")


def _parse_poly(expr: str) -> tuple[int, ...]:
    import sympy

    x = sympy.Symbol("x")
    try:
        parsed = sympy.sympify(expr.replace("^", "**"), locals={"x": x})
        p = sympy.Poly(parsed, x)
    except (sympy.SympifyError, sympy.PolynomialError, TypeError, SyntaxError) as exc:
        raise BetaSpecError(f"cannot parse polynomial {expr!r}") from exc
    coeffs = p.all_coeffs()
    if not all(c.is_integer for c in coeffs):
        raise BetaSpecError(f"polynomial {expr!r} must have integer coefficients")
    if p.degree() < 1:
        raise BetaSpecError(f"polynomial {expr!r} is constant")
    return tuple(int(c) for c in coeffs)


def _check_range(v, spec: str) -> None:
    if not (v > 1 and v <= 2):
        raise BetaSpecError(f"base {spec!r} evaluates outside (1, 2]")


def make_beta(spec, precision: int | None = None) -> BetaParam:
    """Build a :class:`BetaParam` from a descriptor.

    Accepted forms: a decimal literal (``"1.9"``), a ratio (``"19/10"``),
    ``"golden"``, ``"kl"``, ``"tribonacci"``, ``"multinacci:k"``, a named constant
    shifted by a decimal (``"kl-0.001"``), or
    ``"poly:x^3-x^2-x-1 in (1,2)"``. Ints and Fractions are accepted directly.
    """
    if precision is None:
        precision = DEFAULT_PRECISION
    if precision < 64:
        raise BetaSpecError("precision must be at least 64 bits")
    if isinstance(spec, BetaParam):
        return spec.at_precision(precision)
    if isinstance(spec, (int, Fraction)):
        spec = str(Fraction(spec))
    if not isinstance(spec, str):
        raise BetaSpecError(f"unsupported descriptor type {type(spec).__name__}")
    text = spec.strip()

    if _DECIMAL.match(text) or _RATIO.match(text):
        exact = Fraction(text)
        _check_range(exact, text)
        with mp.workprec(precision):
            value = mpmath.mpf(exact.numerator) / exact.denominator
        return BetaParam(value, text, precision, exact=exact)

    m = _NAMED.match(text)
    if m:
        base = constants.named_constant(m.group(1), precision + 8).value
        with mp.workprec(precision):
            value = +base
            if m.group(2):
                offset = Fraction(m.group(3) + (m.group(4) or ""))
                delta = mpmath.mpf(offset.numerator) / offset.denominator
                value = value + delta if m.group(2) == "+" else value - delta
        _check_range(value, text)
        return BetaParam(value, text, precision)

    m = _POLY.match(text)
    if m:
        coeffs = _parse_poly(m.group("expr"))
        try:
            lo, hi = Fraction(m.group("lo")), Fraction(m.group("hi"))
        except (ValueError, ZeroDivisionError) as exc:
            raise BetaSpecError(f"bad isolating interval in {text!r}") from exc
        try:
            value = constants.poly_root(coeffs, lo, hi, precision)
        except ValueError as exc:
            raise BetaSpecError(f"{text!r}: {exc}") from exc
        _check_range(value, text)
        return BetaParam(value, text, precision, poly=coeffs, interval=(lo, hi))

    raise BetaSpecError(f"malformed base descriptor {spec!r}")


# ----------------------------------------------------------------------------
# arithmetic helpers


def _mpf(v):
    if isinstance(v, Fraction):
        return mpmath.mpf(v.numerator) / v.denominator
    return mpmath.mpf(v)


def _lift(x, beta: BetaParam):
    """Return (x, beta) in a common arithmetic."""
    if beta.is_exact and isinstance(x, (int, Fraction)):
        return Fraction(x), beta.exact
    return _mpf(x), beta.value


class HoleGeometry(NamedTuple):
    """Three-part split of ``J = [0, 1/(beta-1)]`` around the open hole ``(a, b)``."""

    a: object
    b: object
    delta: tuple
    delta_in_I: tuple
    i0: tuple
    i1: tuple
    J: tuple

    @property
    def empty(self) -> bool:
        return not self.a < self.b

    @property
    def length_in_I(self):
        lo, hi = self.delta_in_I
        return max(hi - lo, 0 * hi)


def hole(beta: BetaParam) -> HoleGeometry:
    """Hole endpoints ``a = 1/beta`` and ``b = 1/(beta(beta-1))``."""
    with mp.workprec(beta.precision):
        B = beta.num
        one = B / B
        a = one / B
        b = one / (B * (B - 1))
        top = one / (B - 1)
        return HoleGeometry(
            a=a,
            b=b,
            delta=(a, b),
            delta_in_I=(a, min(b, one)),
            i0=(0 * one, a),
            i1=(b, top),
            J=(0 * one, top),
        )


def _check_J(x, B) -> None:
    if x < 0 or x * (B - 1) > 1:
        raise ValueError(f"point {x} outside [0, 1/(beta-1)]")


def greedy_step(x, beta: BetaParam):
    """``G(x) = beta*x`` below ``1/beta`` and ``beta*x - 1`` from ``1/beta`` on."""
    with mp.workprec(beta.precision):
        x, B = _lift(x, beta)
        _check_J(x, B)
        if x >= 1 / B:
            return max(B * x - 1, 0 * x)
        return B * x


def lazy_step(x, beta: BetaParam):
    """``L(x) = beta*x`` up to ``1/(beta(beta-1))`` and ``beta*x - 1`` beyond."""
    with mp.workprec(beta.precision):
        x, B = _lift(x, beta)
        _check_J(x, B)
        if x > 1 / (B * (B - 1)):
            return B * x - 1
        return B * x


def stuck_step(x, beta: BetaParam):
    """The greedy map on ``[0, 1)`` with the hole ``(a, min(b, 1))`` held fixed."""
    with mp.workprec(beta.precision):
        x, B = _lift(x, beta)
        if x < 0 or x >= 1:
            raise ValueError(f"point {x} outside [0, 1)")
        a = 1 / B
        if a < x < 1 / (B * (B - 1)):
            return x
        if x >= a:
            return max(B * x - 1, 0 * x)
        return B * x


class DigitWord(tuple):
    """Finite word over ``{0, 1}``; prints as a bitstring."""

    def __new__(cls, digits: Iterable[int] | str = ()):
        if isinstance(digits, str):
            digits = [int(ch) for ch in digits if not ch.isspace()]
        digits = tuple(int(d) for d in digits)
        if any(d not in (0, 1) for d in digits):
            raise ValueError("digits must be 0 or 1")
        return super().__new__(cls, digits)

    def __str__(self) -> str:
        return "".join(map(str, self))

    def __repr__(self) -> str:
        return f"DigitWord('{self}')"


def lex_leq(u: Sequence[int], v: Sequence[int]) -> bool:
    """Lexicographic order, padding the shorter word with zeros."""
    u, v = DigitWord(u), DigitWord(v)
    n = max(len(u), len(v))
    return u + (0,) * (n - len(u)) <= v + (0,) * (n - len(v))


def greedy_coding(x, beta: BetaParam, n: int) -> DigitWord:
    """First ``n`` digits of the greedy expansion of ``x``."""
    if n < 1:
        raise ValueError("depth must be positive")
    with mp.workprec(beta.precision):
        x, B = _lift(x, beta)
        _check_J(x, B)
        a = 1 / B
        digits = []
        for _ in range(n):
            if x >= a:
                digits.append(1)
                x = max(B * x - 1, 0 * x)
            else:
                digits.append(0)
                x = B * x
        return DigitWord(digits)


def project(w: Sequence[int], beta: BetaParam):
    """Return ``(sum_k w_k beta**-k, beta**-len(w) / (beta - 1))``.

    The second entry bounds the contribution of any infinite continuation.
    """
    w = DigitWord(w)
    with mp.workprec(beta.precision):
        B = beta.num
        acc = 0 * B
        for d in reversed(w):
            acc = (acc + d) / B
        tail = 1 / (B ** len(w) * (B - 1))
        return acc, tail


@dataclass(frozen=True)
class UnivoqueResult:
    status: str  # "survives" | "escapes" | "undetermined"
    step: int | None
    depth: int

    @property
    def survives(self) -> bool:
        return self.status == "survives"


def univoque_test(x, beta: BetaParam, n: int, margin=None) -> UnivoqueResult:
    """Finite-depth certificate that the greedy orbit of ``x`` avoids the open hole.

    Reports the first ``k <= n`` with ``G**k(x)`` inside ``(a, b)``. In floating
    point a running error bound is kept; an iterate whose distance to a hole
    endpoint (or to the branch point) is within ``margin`` plus that bound
    gives ``undetermined``.
    """
    if n < 0:
        raise ValueError("depth must be non-negative")
    with mp.workprec(beta.precision):
        x, B = _lift(x, beta)
        _check_J(x, B)
        exact = isinstance(x, Fraction)
        geom = hole(beta)
        a, b = (geom.a, geom.b) if exact else (_mpf(geom.a), _mpf(geom.b))
        mu = 0 if exact else (margin if margin is not None else default_margin(beta.precision))
        ulp = 0 if exact else mpmath.ldexp(mpmath.mpf(1), -beta.precision + 2)
        err = 0 if exact else abs(x) * ulp
        for k in range(n + 1):
            tol = mu + err
            if not exact and (err > mu):
                return UnivoqueResult("undetermined", k, n)
            if a + tol < x < b - tol:
                return UnivoqueResult("escapes", k, n)
            if not exact and (abs(x - a) <= tol or abs(x - b) <= tol):
                return UnivoqueResult("undetermined", k, n)
            if k == n:
                break
            y = B * x
            x = y - 1 if x >= a else y
            if not exact:
                err = B * err + abs(y) * ulp
        return UnivoqueResult("survives", None, n)
