"""Lebesgue measure of survivor sets and empirical escape rates.

``W_n`` is the set of points of ``I = [0, 1)`` whose first ``n + 1`` iterates
(times ``0..n``) avoid the open hole, and ``Gamma_n = W_{n-1} \\ W_n`` the
points that enter at time ``n``. Two engines compute ``lambda(W_n)``:

``"preimage"``
    keeps ``W_n`` itself as an :class:`IntervalSet` and applies
    ``W_{n+1} = W_0 & T^{-1}(W_n)``. The interval count grows like the
    survivor entropy, so this is bounded by ``max_intervals``.
``"pushforward"``
    keeps the ``T^n``-images of the monotone pieces of ``W_n`` with integer
    multiplicities. Every image endpoint lies on the forward orbit of
    ``0, 1, c, d`` or the branch point, so the number of distinct images stays
    small while the measure ``beta**-n * sum(weight * length)`` is exact.
"""
from __future__ import annotations

import bisect
import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

import mpmath
import numpy as np
from mpmath import mp
from scipy import stats

from .beta_core import BetaParam, hole as hole_geometry

__all__ = [
    "IntervalSet",
    "SurvivorRow",
    "SurvivorTable",
    "EmpiricalFit",
    "NoDecayError",
    "preimage",
    "survivor_iterate",
    "escape_rate_empirical",
]


class NoDecayError(ValueError):
    """Survivor measures give nothing to fit (zero measure in the window)."""


def _to_mpf(v):
    if isinstance(v, Fraction):
        return mpmath.mpf(v.numerator) / v.denominator
    return mpmath.mpf(v)


class IntervalSet:
    """Finite sorted union of disjoint closed intervals.

    Endpoints closer than ``merge_tolerance`` are fused on construction and
    zero-length pieces are dropped, so all measures are unaffected by the
    open/closed status of endpoints.
    """

    __slots__ = ("intervals", "merge_tolerance")

    def __init__(self, intervals: Iterable[tuple] = (), merge_tolerance=0):
        self.merge_tolerance = merge_tolerance
        self.intervals: tuple = self._normalise(intervals, merge_tolerance)

    @staticmethod
    def _normalise(intervals, tol) -> tuple:
        items = sorted((lo, hi) for lo, hi in intervals if hi > lo)
        out: list = []
        for lo, hi in items:
            if out and lo - out[-1][1] <= tol:
                if hi > out[-1][1]:
                    out[-1] = (out[-1][0], hi)
            else:
                out.append((lo, hi))
        return tuple(out)

    @classmethod
    def _raw(cls, intervals: tuple, tol) -> "IntervalSet":
        obj = cls.__new__(cls)
        obj.intervals = intervals
        obj.merge_tolerance = tol
        return obj

    def __iter__(self) -> Iterator[tuple]:
        return iter(self.intervals)

    def __len__(self) -> int:
        return len(self.intervals)

    def __bool__(self) -> bool:
        return bool(self.intervals)

    def __eq__(self, other) -> bool:
        if not isinstance(other, IntervalSet):
            return NotImplemented
        return self.intervals == other.intervals

    def __repr__(self) -> str:
        body = ", ".join(f"[{lo}, {hi}]" for lo, hi in self.intervals[:6])
        more = " ..." if len(self.intervals) > 6 else ""
        return f"IntervalSet({body}{more})"

    @property
    def measure(self):
        total = 0
        for lo, hi in self.intervals:
            total = total + (hi - lo)
        return total

    def __or__(self, other: "IntervalSet") -> "IntervalSet":
        return IntervalSet(self.intervals + other.intervals, self.merge_tolerance)

    def __and__(self, other: "IntervalSet") -> "IntervalSet":
        A, B = self.intervals, other.intervals
        i = j = 0
        out = []
        while i < len(A) and j < len(B):
            lo = max(A[i][0], B[j][0])
            hi = min(A[i][1], B[j][1])
            if hi > lo:
                out.append((lo, hi))
            if A[i][1] < B[j][1]:
                i += 1
            else:
                j += 1
        return IntervalSet(out, self.merge_tolerance)

    def complement(self, lo=0, hi=1) -> "IntervalSet":
        out, cur = [], lo
        for a, b in self.intervals:
            if a > cur:
                out.append((cur, min(a, hi)))
            cur = max(cur, b)
        if cur < hi:
            out.append((cur, hi))
        return IntervalSet(out, self.merge_tolerance)

    def __sub__(self, other: "IntervalSet") -> "IntervalSet":
        if not self.intervals:
            return self
        lo = min(self.intervals[0][0], other.intervals[0][0]) if other.intervals else self.intervals[0][0]
        hi = max(self.intervals[-1][1], other.intervals[-1][1]) if other.intervals else self.intervals[-1][1]
        return self & other.complement(lo, hi)

    def contains(self, x) -> bool:
        i = bisect.bisect_right(self.intervals, (x, x)) - 1
        for j in (i, i + 1):
            if 0 <= j < len(self.intervals) and self.intervals[j][0] <= x <= self.intervals[j][1]:
                return True
        return False


def preimage(J: IntervalSet, beta: BetaParam) -> IntervalSet:
    """``T^{-1}(J)`` inside ``[0, 1]``: ``J/beta`` together with ``((J + 1)/beta) & [1/beta, 1]``."""
    with mp.workprec(beta.precision):
        B = beta.num if all(isinstance(v, (int, Fraction)) for iv in J for v in iv) else beta.value
        a = 1 / B
        first = [(lo / B, hi / B) for lo, hi in J]
        second = []
        for lo, hi in J:
            plo, phi = (lo + 1) / B, (hi + 1) / B
            if plo >= 1:
                break
            second.append((max(plo, a), min(phi, 1 + 0 * phi)))
        return IntervalSet(first + second, J.merge_tolerance)


@dataclass(frozen=True)
class SurvivorRow:
    n: int
    measure_W: mpmath.mpf
    measure_Gamma: mpmath.mpf
    interval_count: int


@dataclass
class SurvivorTable:
    """Survivor measures for ``n = 0..depth``.

    ``interval_count`` is the number of maximal intervals of ``W_n`` for the
    preimage engine and the number of monotone pieces for the pushforward
    engine. Row 0 reports ``lambda(Gamma_0) = lambda(hole & I)``.
    """

    beta: BetaParam
    rows: list
    method: str
    hole: tuple
    merge_tolerance: object
    truncated: bool = False
    hole_measure: object = 0

    def conservation_error(self, n: int | None = None):
        """``|sum_{k=1..n} lambda(Gamma_k) + lambda(W_n) - lambda(W_0)|``."""
        with mp.workprec(self.beta.precision):
            n = self.rows[-1].n if n is None else n
            total = mpmath.fsum(r.measure_Gamma for r in self.rows[1 : n + 1])
            return abs(total + self.rows[n].measure_W - self.rows[0].measure_W)

    def measures(self) -> np.ndarray:
        return np.array([float(r.measure_W) for r in self.rows])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "measure_W", "measure_Gamma", "interval_count"])
        for r in self.rows:
            w.writerow([r.n, mpmath.nstr(r.measure_W, 20, strip_zeros=False, min_fixed=-1, max_fixed=1),
                        mpmath.nstr(r.measure_Gamma, 20, strip_zeros=False, min_fixed=-1, max_fixed=1),
                        r.interval_count])
        return buf.getvalue()


def _hole_for(beta: BetaParam, hole, prec):
    geom = hole_geometry(beta)
    if hole is None:
        c, d = geom.delta_in_I
    else:
        c, d = hole
    c, d = _to_mpf(c), _to_mpf(d)
    return c, min(d, mpmath.mpf(1))


def _preimage_engine(beta, depth, c, d, tol, max_intervals):
    one, zero = mpmath.mpf(1), mpmath.mpf(0)
    I = IntervalSet([(zero, one)], tol)
    H = IntervalSet([(c, d)], tol) if d > c else IntervalSet([], tol)
    W0 = I - H
    rows = [SurvivorRow(0, W0.measure, H.measure, len(W0))]
    W = W0
    prev = W0.measure
    truncated = False
    for n in range(1, depth + 1):
        W = W0 & preimage(W, beta)
        m = W.measure
        rows.append(SurvivorRow(n, m, prev - m, len(W)))
        prev = m
        if len(W) > max_intervals:
            truncated = True
            break
    return rows, truncated


def _pushforward_engine(beta, depth, c, d, max_intervals):
    B = beta.value
    a = 1 / B
    one, zero = mpmath.mpf(1), mpmath.mpf(0)

    def cut_hole(lo, hi, acc, w):
        # split [lo, hi] by the hole; returns the part inside the hole
        inside = zero
        if lo < c:
            acc_add(acc, lo, min(hi, c), w)
        if hi > c and lo < d:
            inside = min(hi, d) - max(lo, c)
        if hi > d:
            acc_add(acc, max(lo, d), hi, w)
        return inside

    def acc_add(acc, lo, hi, w):
        if hi > lo:
            key = (lo, hi)
            acc[key] = acc.get(key, 0) + w

    state: dict = {}
    h0 = cut_hole(zero, one, state, 1) if d > c else zero
    if d <= c:
        state = {(zero, one): 1}
    m0 = mpmath.fsum(w * (hi - lo) for (lo, hi), w in state.items())
    rows = [SurvivorRow(0, m0, h0, sum(state.values()))]
    scale = one
    truncated = False
    for n in range(1, depth + 1):
        scale = scale / B
        nxt: dict = {}
        lost = []
        for (lo, hi), w in state.items():
            if lo < a:
                ilo, ihi = B * lo, B * min(hi, a)
                lost.append(w * cut_hole(ilo, ihi, nxt, w))
            if hi > a:
                ilo, ihi = B * max(lo, a) - 1, B * hi - 1
                lost.append(w * cut_hole(ilo, ihi, nxt, w))
        state = nxt
        m = scale * mpmath.fsum(w * (hi - lo) for (lo, hi), w in state.items())
        g = scale * mpmath.fsum(lost)
        rows.append(SurvivorRow(n, m, g, sum(state.values())))
        if len(state) > max_intervals:
            truncated = True
            break
    return rows, truncated


def survivor_iterate(beta: BetaParam, depth: int = 40, max_intervals: int = 2_000_000,
                     merge_tolerance=None, hole=None, method: str = "pushforward") -> SurvivorTable:
    """Tabulate ``lambda(W_n)`` and ``lambda(Gamma_n)`` for ``n = 0..depth``.

    ``hole`` overrides the default hole ``(1/beta, min(1/(beta(beta-1)), 1))``.
    The ``preimage`` engine stops once ``W_n`` has more than
    ``max_intervals`` intervals (the pushforward engine applies the cap to
    distinct images) and marks the table ``truncated``.
    """
    if depth < 1:
        raise ValueError("depth must be at least 1")
    prec = max(beta.precision, int(depth * math.log2(float(beta.value))) + 64)
    with mp.workprec(prec):
        b = beta if prec == beta.precision else beta.at_precision(prec)
        tol = merge_tolerance if merge_tolerance is not None else mpmath.ldexp(1, -beta.precision + 16)
        c, d = _hole_for(b, hole, prec)
        if method == "preimage":
            rows, truncated = _preimage_engine(b, depth, c, d, tol, max_intervals)
        elif method == "pushforward":
            rows, truncated = _pushforward_engine(b, depth, c, d, max_intervals)
        else:
            raise ValueError(f"unknown survivor method {method!r}")
    return SurvivorTable(beta, rows, method, (c, d), tol, truncated, max(d - c, 0 * c))


@dataclass(frozen=True)
class EmpiricalFit:
    """Least-squares exponential fit of the survivor measures."""

    e_hat: float
    E_hat: float
    intercept: float
    stderr: float
    residual: float
    r_squared: float
    window: tuple
    status: str = "ok"
    gamma_slope: float | None = None
    gamma_stderr: float | None = None


def _linfit(ns: np.ndarray, ys: np.ndarray):
    res = stats.linregress(ns, ys)
    pred = res.intercept + res.slope * ns
    residual = float(np.linalg.norm(ys - pred))
    r2 = float(res.rvalue ** 2) if np.ptp(ys) > 0 else 1.0
    return float(res.slope), float(res.intercept), float(res.stderr), residual, r2


def escape_rate_empirical(table: SurvivorTable, window: tuple | None = None) -> EmpiricalFit:
    """Slope of ``-log lambda(W_n)`` over ``n`` in ``window``.

    The default window is ``[depth/2, depth]``. A constant survivor measure
    (empty hole) yields ``status="no-decay"`` with zero rates; a vanishing
    measure inside the window raises :class:`NoDecayError`.
    """
    last = table.rows[-1].n
    if window is None:
        window = (last // 2, last)
    n_lo, n_hi = window
    if not (0 <= n_lo < n_hi <= last):
        raise ValueError(f"window {window} outside table rows 0..{last}")
    rows = table.rows[n_lo : n_hi + 1]
    if any(r.measure_W <= 0 for r in rows):
        raise NoDecayError("survivor measure vanishes inside the fit window")
    ns = np.array([r.n for r in rows], dtype=float)
    ys = np.array([-float(mpmath.log(r.measure_W)) for r in rows])
    lb = math.log(float(table.beta.value))
    if np.ptp(ys) == 0 or all(r.measure_W == rows[0].measure_W for r in rows):
        return EmpiricalFit(0.0, 0.0, float(ys[0]), 0.0, 0.0, 1.0, (n_lo, n_hi), "no-decay")
    slope, icpt, se, resid, r2 = _linfit(ns, ys)
    gslope = gse = None
    if all(r.measure_Gamma > 0 for r in rows):
        gys = np.array([-float(mpmath.log(r.measure_Gamma)) for r in rows])
        gslope, _, gse, _, _ = _linfit(ns, gys)
    return EmpiricalFit(slope, slope / lb, icpt, se, resid, r2, (n_lo, n_hi), "ok", gslope, gse)
