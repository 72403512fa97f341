"""Markov partitions for matching bases and the spectral escape rate.

When both hole endpoints of ``(a, b) = (1/beta, 1/(beta(beta-1)))`` fall into
the hole under iteration, their orbit points cut ``[0, 1]`` into a partition
that is Markov for the stuck map. The Perron root ``rho`` of the transition
matrix restricted to non-hole cells gives the survivor entropy ``log rho``,
the escape rate ``log beta - log rho`` and the dimension ``log rho / log beta``.

The left endpoint ``a`` is followed along its left-branch limit: ``a -> 1 ->
beta - 1 -> ...``. This is the orbit of the discontinuity that the partition
has to resolve; the literal value ``T(a) = 0`` is the right-branch image.

Bases whose endpoint orbits never enter the hole are bracketed by holes that
are slightly larger or smaller than ``(a, b)`` and do close up.
"""
from __future__ import annotations

import bisect
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Sequence

import mpmath
import numpy as np
import scipy.sparse as sp
from mpmath import mp
from scipy.sparse.csgraph import connected_components

from .beta_core import BetaParam, default_margin, hole as hole_geometry, make_beta
from .constants import golden_ratio

log = logging.getLogger(__name__)

__all__ = [
    "OrbitStatus",
    "OrbitRecord",
    "MatchingResult",
    "MarkovPartition",
    "MarkovCheck",
    "TransitionMatrix",
    "MatrixEscape",
    "Bracket",
    "AnalysisConfig",
    "AnalysisReport",
    "UndeterminedError",
    "MarkovConstructionError",
    "PerronConvergenceError",
    "orbit_until_hole",
    "detect_matching",
    "build_partition",
    "markov_closure",
    "verify_markov",
    "build_transition",
    "perron_root",
    "escape_from_matrix",
    "hole_escape",
    "approx_bracket",
    "decide_escape",
]


class UndeterminedError(RuntimeError):
    """An orbit decision needs more precision than was available."""


class MarkovConstructionError(RuntimeError):
    """A partition or its transition matrix is internally inconsistent."""


class PerronConvergenceError(RuntimeError):
    def __init__(self, lower: float, upper: float, iterations: int):
        super().__init__(
            f"power iteration did not converge after {iterations} steps; "
            f"Collatz-Wielandt bounds [{lower!r}, {upper!r}]"
        )
        self.lower, self.upper, self.iterations = lower, upper, iterations


class OrbitStatus(str, Enum):
    ENTERED = "entered"
    BOUNDARY = "boundary-periodic"
    OPEN = "open"
    UNDETERMINED = "undetermined"


# ----------------------------------------------------------------------------
# orbit arithmetic


class _Arith:
    """Exact rational or error-tracked floating arithmetic for one base."""

    def __init__(self, beta: BetaParam, margin=None):
        self.beta = beta
        self.exact = beta.is_exact
        self.prec = beta.precision
        if self.exact:
            self.B = beta.exact
            self.mu = Fraction(0)
            self.ulp = Fraction(0)
            self.zero, self.one = Fraction(0), Fraction(1)
        else:
            self.B = beta.value
            self.mu = mpmath.mpf(margin) if margin is not None else default_margin(self.prec)
            self.ulp = mpmath.ldexp(mpmath.mpf(1), -self.prec + 2)
            self.zero, self.one = mpmath.mpf(0), mpmath.mpf(1)
        self.a = self.one / self.B
        self.b = self.one / (self.B * (self.B - 1))

    def conv(self, v):
        if self.exact:
            return Fraction(v)
        if isinstance(v, Fraction):
            return mpmath.mpf(v.numerator) / v.denominator
        return mpmath.mpf(v)

    def step(self, x, err):
        """One greedy step with the error bound carried along."""
        y = self.B * x
        nxt = y - 1 if x >= self.a else y
        if self.exact:
            return nxt, err
        return nxt, self.B * err + abs(y) * self.ulp

    def start_err(self, x):
        return self.zero if self.exact else abs(x) * self.ulp


class _Registry:
    """Known cut points with tolerant lookup."""

    def __init__(self, exact: bool):
        self.exact = exact
        self._map: dict = {}
        self._keys: list = []
        self._labels: list = []

    def add(self, x, label) -> None:
        if self.exact:
            self._map.setdefault(x, label)
            return
        i = bisect.bisect_left(self._keys, x)
        self._keys.insert(i, x)
        self._labels.insert(i, label)

    def find(self, x, tol):
        if self.exact:
            return self._map.get(x)
        i = bisect.bisect_left(self._keys, x)
        best, best_d = None, None
        for j in (i - 1, i):
            if 0 <= j < len(self._keys):
                d = abs(self._keys[j] - x)
                if d <= tol and (best_d is None or d < best_d):
                    best, best_d = self._labels[j], d
        return best

    def values(self):
        return list(self._map) if self.exact else list(self._keys)


def _trace(ar: _Arith, x, err, registry: _Registry, lo, hi, max_steps: int, tag: str,
           offset: int = 0):
    """Iterate the greedy map from ``x`` until the open hole ``(lo, hi)`` is entered.

    Returns ``(points, status, step, landed_label)``; ``points`` excludes the
    landing point for BOUNDARY results. Visited points are registered.
    """
    points = []
    for k in range(max_steps + 1):
        if not ar.exact and err > ar.mu:
            return points, OrbitStatus.UNDETERMINED, k, None
        tol = ar.mu + err
        hit = registry.find(x, tol)
        if hit is not None:
            return points, OrbitStatus.BOUNDARY, k, hit
        points.append(x)
        if lo + tol < x < hi - tol:
            return points, OrbitStatus.ENTERED, k, None
        registry.add(x, (tag, k + offset))
        if k == max_steps:
            break
        x, err = ar.step(x, err)
    return points, OrbitStatus.OPEN, max_steps, None


@dataclass(frozen=True)
class OrbitRecord:
    """Itinerary of one hole endpoint.

    ``step`` is the first-entry index ``i_*`` (ENTERED), the landing index
    (BOUNDARY) or the index where the decision failed (UNDETERMINED). For the
    left endpoint ``points`` reads ``a, 1, beta-1, ...``.
    """

    endpoint: str
    points: tuple
    status: OrbitStatus
    step: int | None
    period: int | None = None
    landed_on: object = None
    margin_used: object = None
    precision: int = 0

    @property
    def entered(self) -> bool:
        return self.status is OrbitStatus.ENTERED


def _orbit_once(endpoint: str, beta: BetaParam, max_steps: int, margin) -> OrbitRecord:
    with mp.workprec(beta.precision):
        ar = _Arith(beta, margin)
        reg = _Registry(ar.exact)
        reg.add(ar.zero, ("0", 0))
        reg.add(ar.a, ("a", 0) if endpoint == "a" else ("a", None))
        reg.add(ar.b, ("b", 0) if endpoint == "b" else ("b", None))
        if endpoint == "a":
            head = [ar.a, ar.one]
            x0 = ar.B - 1
        elif endpoint == "b":
            head = [ar.b]
            x0, _ = ar.step(ar.b, ar.zero)
        else:
            raise ValueError("endpoint must be 'a' or 'b'")
        offset = len(head)
        pts, status, k, landed = _trace(
            ar, x0, ar.start_err(x0), reg, ar.a, ar.b, max_steps - offset, endpoint, offset
        )
        points = tuple(head + pts)
        step = k + offset
        period = None
        landed_point = None
        if status is OrbitStatus.BOUNDARY:
            tag, idx = landed
            if tag == endpoint and idx is not None:
                period = step - idx
            landed_point = tag if idx is None or tag != endpoint else idx
        return OrbitRecord(
            endpoint=endpoint,
            points=points,
            status=status,
            step=step if status is not OrbitStatus.OPEN else None,
            period=period,
            landed_on=landed_point,
            margin_used=ar.mu,
            precision=beta.precision,
        )


def orbit_until_hole(
    endpoint: str, beta: BetaParam, max_steps: int = 10_000, margin=None, escalations: int = 1
) -> OrbitRecord:
    """Follow the hole endpoint ``a`` or ``b`` until it enters ``(a, b)``.

    Floating-point boundary recurrences are re-checked at doubled precision;
    an undetermined result is retried at doubled precision up to
    ``escalations`` times.
    """
    if max_steps < 1:
        raise ValueError("max_steps must be positive")
    rec = _orbit_once(endpoint, beta, max_steps, margin)
    if beta.is_exact:
        return rec
    if rec.status is OrbitStatus.BOUNDARY:
        hi = beta.at_precision(2 * beta.precision)
        confirm = _orbit_once(endpoint, hi, max_steps, None)
        if confirm.status is OrbitStatus.BOUNDARY and confirm.step == rec.step:
            return rec
        if confirm.status is not OrbitStatus.UNDETERMINED:
            return confirm
        return OrbitRecord(endpoint, rec.points, OrbitStatus.UNDETERMINED, rec.step,
                           margin_used=rec.margin_used, precision=beta.precision)
    if rec.status is OrbitStatus.UNDETERMINED and escalations > 0:
        return orbit_until_hole(endpoint, beta.at_precision(2 * beta.precision), max_steps,
                                None, escalations - 1)
    return rec


@dataclass(frozen=True)
class MatchingResult:
    status: str  # "F" | "N" | "undetermined"
    record_a: OrbitRecord
    record_b: OrbitRecord

    @property
    def in_F(self) -> bool:
        return self.status == "F"

    @property
    def i_a(self) -> int | None:
        return self.record_a.step if self.record_a.entered else None

    @property
    def i_b(self) -> int | None:
        return self.record_b.step if self.record_b.entered else None


def _golden_or_below(beta: BetaParam) -> bool:
    if beta.is_exact:
        # golden is irrational, so a rational base is never equal to it
        return beta.exact * (beta.exact - 1) < 1
    with mp.workprec(beta.precision):
        return beta.value <= golden_ratio(beta.precision) + default_margin(beta.precision)


def detect_matching(beta: BetaParam, max_steps: int = 10_000, margin=None,
                    escalations: int = 1) -> MatchingResult:
    """Classify the base by whether both endpoint orbits enter the hole."""
    if beta.num >= 2:
        raise ValueError("matching is undefined for beta = 2 (empty hole)")
    if _golden_or_below(beta):
        raise ValueError("hole reaches 1 for beta <= golden ratio; use the analytic route")
    ra = orbit_until_hole("a", beta, max_steps, margin, escalations)
    rb = orbit_until_hole("b", beta, max_steps, margin, escalations)
    if OrbitStatus.UNDETERMINED in (ra.status, rb.status):
        status = "undetermined"
    elif ra.entered and rb.entered:
        status = "F"
    else:
        status = "N"
    return MatchingResult(status, ra, rb)


# ----------------------------------------------------------------------------
# partitions


@dataclass(frozen=True)
class MarkovPartition:
    """Ordered cuts of ``[0, 1]``; cell ``j`` is ``[cuts[j], cuts[j+1]]``."""

    cuts: tuple
    hole: tuple
    is_hole: tuple
    digit: tuple
    beta: BetaParam
    tolerance: object = 0
    certificates: dict = field(default_factory=dict, compare=False)
    _index: dict | None = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.tolerance == 0:
            object.__setattr__(self, "_index", {x: j for j, x in enumerate(self.cuts)})

    @property
    def n_cells(self) -> int:
        return len(self.cuts) - 1

    def cell(self, j: int) -> tuple:
        return self.cuts[j], self.cuts[j + 1]


def _sorted_exact(points) -> list:
    # Comparing rationals with huge denominators is costly, so sort on a
    # 256-bit approximation and certify the order with one exact
    # comparison per adjacent pair.
    with mp.workprec(256):
        keyed = sorted((mpmath.mpf(p.numerator) / p.denominator, p) for p in points)
        gap = mpmath.ldexp(1, -240)
        # approximations of points in [0, 1] are off by at most 2**-255
        ok = all(k1 - k0 > gap or x <= y
                 for (k0, x), (k1, y) in zip(keyed, keyed[1:]))
    if ok:
        return [p for _, p in keyed]
    return sorted(points)


def _assemble(ar: _Arith, points, c, d, beta: BetaParam, certificates=None) -> MarkovPartition:
    inside = [p for p in points if ar.zero <= p <= ar.one]
    pts = _sorted_exact(inside) if ar.exact else sorted(inside)
    tol = 0 if ar.exact else ar.mu
    cuts = []
    for p in pts:
        if cuts and (p == cuts[-1] if ar.exact else abs(p - cuts[-1]) <= tol):
            continue
        cuts.append(p)
    if cuts[0] != ar.zero or cuts[-1] != ar.one:
        raise MarkovConstructionError("cuts must include 0 and 1")
    c_lo, d_hi, a_hi = (c, d, ar.a) if ar.exact else (c - tol, d + tol, ar.a + tol)
    is_hole, digit = [], []
    for lo, hi in zip(cuts, cuts[1:]):
        is_hole.append(bool(lo >= c_lo and hi <= d_hi))
        digit.append(0 if hi <= a_hi else 1)
    return MarkovPartition(tuple(cuts), (c, d), tuple(is_hole), tuple(digit), beta,
                           tol * 4, dict(certificates or {}))


def build_partition(record_a: OrbitRecord, record_b: OrbitRecord, beta: BetaParam) -> MarkovPartition:
    """Cut points ``{0, 1}``, the orbit of ``a`` and the orbit of ``b``."""
    if not (record_a.entered and record_b.entered):
        raise ValueError("both endpoint orbits must enter the hole")
    if record_a.precision != beta.precision:
        beta = beta.at_precision(record_a.precision)
    with mp.workprec(beta.precision):
        ar = _Arith(beta, record_a.margin_used)
        pts = [ar.zero, ar.one, *record_a.points, *record_b.points]
        return _assemble(ar, pts, ar.a, min(ar.b, ar.one), beta,
                         {"i_a": record_a.step, "i_b": record_b.step})


def _markov_closure_once(beta: BetaParam, c, d, max_steps: int, margin, allow_landing: bool):
    with mp.workprec(beta.precision):
        ar = _Arith(beta, margin)
        c, d = ar.conv(c), ar.conv(d)
        d = min(d, ar.one)
        if not (ar.zero <= c < d <= ar.one):
            raise ValueError("hole must satisfy 0 <= c < d <= 1")
        reg = _Registry(ar.exact)
        fixed = [ar.zero, ar.a, c, d, ar.one]
        for p in fixed:
            if reg.find(p, ar.mu) is None:
                reg.add(p, ("cut", 0))
        seeds = [("kneading", ar.B - 1)]
        tol = ar.mu
        if c > ar.zero and abs(c - ar.a) > tol:
            seeds.append(("left", ar.B * c - (1 if c > ar.a else 0)))
        if d < ar.one and abs(d - ar.a) > tol:
            seeds.append(("right", ar.B * d - (1 if d > ar.a else 0)))
        pts = list(fixed)
        info = {}
        for tag, x0 in seeds:
            p, status, k, _ = _trace(ar, x0, ar.start_err(x0), reg, c, d, max_steps, tag)
            pts.extend(p)
            info[tag] = (status.value, k)
            if status is OrbitStatus.UNDETERMINED:
                return None, info, True
            if status is OrbitStatus.OPEN or (status is OrbitStatus.BOUNDARY and not allow_landing):
                return None, info, False
        return _assemble(ar, pts, c, d, beta, info), info, False


def markov_closure(beta: BetaParam, c, d, max_steps: int = 10_000, margin=None,
                   allow_landing: bool = True, escalations: int = 1):
    """Markov partition for the open hole ``(c, d)`` inside ``[0, 1)``.

    Tracks the orbits of ``beta - 1`` (image of ``1^-``), ``T(c^-)`` and
    ``T(d)``. Each must enter ``(c, d)`` or, when ``allow_landing`` is set,
    land exactly on an existing cut. Returns ``None`` when some orbit stays
    open; raises :class:`UndeterminedError` when precision runs out.
    """
    part, info, undetermined = _markov_closure_once(beta, c, d, max_steps, margin, allow_landing)
    if undetermined:
        if escalations > 0 and not beta.is_exact:
            return markov_closure(beta.at_precision(2 * beta.precision), c, d, max_steps,
                                  None, allow_landing, escalations - 1)
        raise UndeterminedError(f"closure of hole undetermined: {info}")
    return part


@dataclass(frozen=True)
class MarkovCheck:
    ok: bool
    witness: int | None = None
    detail: str = ""

    def __bool__(self) -> bool:
        return self.ok


def _cut_index(part: MarkovPartition, x) -> int | None:
    if part._index is not None:
        return part._index.get(x)
    cuts = part.cuts
    i = bisect.bisect_left(cuts, x)
    for j in (i - 1, i):
        if 0 <= j < len(cuts) and abs(cuts[j] - x) <= part.tolerance:
            return j
    return None


def _cell_image(part: MarkovPartition, j: int, B):
    lo, hi = part.cell(j)
    dgt = part.digit[j]
    return B * lo - dgt, B * hi - dgt


def verify_markov(part: MarkovPartition, beta: BetaParam | None = None) -> MarkovCheck:
    """Check that every non-hole cell maps onto a union of cells."""
    beta = beta or part.beta
    with mp.workprec(max(beta.precision, part.beta.precision)):
        B = part.beta.num
        for j in range(part.n_cells):
            if part.is_hole[j]:
                continue
            ilo, ihi = _cell_image(part, j, B)
            if _cut_index(part, ilo) is None:
                return MarkovCheck(False, j, f"image of left end of cell {j} is not a cut")
            if _cut_index(part, ihi) is None:
                return MarkovCheck(False, j, f"image of right end of cell {j} is not a cut")
        return MarkovCheck(True)


@dataclass(frozen=True)
class TransitionMatrix:
    """0-1 transition matrix over labelled cells, optionally scaled uniformly."""

    labels: tuple
    matrix: sp.csr_matrix
    scale: float | None = None

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def toarray(self) -> np.ndarray:
        m = self.matrix.toarray().astype(float)
        return m * self.scale if self.scale is not None else m

    def scaled(self, factor: float) -> "TransitionMatrix":
        return TransitionMatrix(self.labels, self.matrix, factor)

    def restrict(self, keep: Sequence[int]) -> "TransitionMatrix":
        keep = list(keep)
        sub = self.matrix[keep][:, keep].tocsr()
        return TransitionMatrix(tuple(self.labels[i] for i in keep), sub, self.scale)


def build_transition(part: MarkovPartition, beta: BetaParam | None = None):
    """Return ``(A, A_minus)``; ``A(i, j) = 1`` when cell ``j`` lies in the image of cell ``i``.

    Hole cells are fixed by the stuck map and carry only a self-loop.
    ``A_minus`` drops the hole rows and columns.
    """
    rows, cols = [], []
    with mp.workprec(part.beta.precision):
        B = part.beta.num
        for j in range(part.n_cells):
            if part.is_hole[j]:
                rows.append(j)
                cols.append(j)
                continue
            ilo, ihi = _cell_image(part, j, B)
            k0, k1 = _cut_index(part, ilo), _cut_index(part, ihi)
            if k0 is None or k1 is None or k1 <= k0:
                raise MarkovConstructionError(f"cell {j} image straddles cuts")
            rows.extend([j] * (k1 - k0))
            cols.extend(range(k0, k1))
    n = part.n_cells
    A = sp.csr_matrix((np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(n, n))
    A.sum_duplicates()
    labels = tuple(range(n))
    full = TransitionMatrix(labels, A)
    keep = [j for j in range(n) if not part.is_hole[j]]
    return full, full.restrict(keep)


# ----------------------------------------------------------------------------
# spectral radius


def _as_sparse(M) -> tuple[sp.csr_matrix, float]:
    if isinstance(M, TransitionMatrix):
        return M.matrix.astype(float).tocsr(), (M.scale if M.scale is not None else 1.0)
    if sp.issparse(M):
        return M.astype(float).tocsr(), 1.0
    return sp.csr_matrix(np.asarray(M, dtype=float)), 1.0


def _component_radius(sub: sp.csr_matrix, tol: float, max_iter: int) -> float:
    m = sub.shape[0]
    if m == 1:
        return float(sub[0, 0])
    x = np.ones(m)
    shift = 1.0
    lo = hi = 0.0
    for it in range(1, max_iter + 1):
        y = sub @ x + shift * x
        r = y / x
        lo, hi = float(r.min()), float(r.max())
        if hi - lo <= tol * hi:
            return 0.5 * (lo + hi) - shift
        x = y / y.max()
    # slow convergence: finish with a dense eigensolve when the block is small
    if m <= 3000:
        ev = np.linalg.eigvals(sub.toarray())
        rho = float(np.max(np.abs(ev)))
        if lo - shift - 1e-9 <= rho <= hi - shift + 1e-9:
            return rho
    raise PerronConvergenceError(lo - shift, hi - shift, max_iter)


def perron_root(M, tol: float = 1e-13, max_iter: int = 20_000) -> float:
    """Spectral radius of a nonnegative square matrix.

    The matrix is split into strongly connected components; each component is
    irreducible, so power iteration on ``M + I`` from the all-ones vector
    converges and the Collatz-Wielandt quotients bracket its radius.
    """
    A, scale = _as_sparse(M)
    n, m = A.shape
    if n != m:
        raise ValueError("matrix must be square")
    if n == 0:
        return 0.0
    if A.nnz and A.data.min() < 0:
        raise ValueError("matrix must be nonnegative")
    ncomp, lab = connected_components(A, directed=True, connection="strong")
    best = 0.0
    for comp in range(ncomp):
        idx = np.flatnonzero(lab == comp)
        sub = A[idx][:, idx].tocsr()
        if sub.nnz == 0:
            continue
        best = max(best, _component_radius(sub, tol, max_iter))
    return best * scale


@dataclass(frozen=True)
class MatrixEscape:
    rho: float
    entropy: float
    e: float
    E: float
    dim: float


def escape_from_matrix(A_minus, beta: BetaParam, tol: float = 1e-9) -> MatrixEscape:
    """Escape rate, normalised rate and dimension from the survivor matrix."""
    rho = perron_root(A_minus)
    lb = math.log(float(beta.value))
    if not (1 - tol <= rho <= float(beta.value) * (1 + tol)):
        raise MarkovConstructionError(f"Perron root {rho} outside [1, beta]")
    rho = min(max(rho, 1.0), float(beta.value))
    h = math.log(rho)
    return MatrixEscape(rho=rho, entropy=h, e=lb - h, E=1 - h / lb, dim=h / lb)


def hole_escape(beta: BetaParam, c, d, max_steps: int = 10_000, margin=None,
                allow_landing: bool = True, escalations: int = 1):
    """Escape data for the hole ``(c, d)`` via its Markov closure, or ``None``."""
    part = markov_closure(beta, c, d, max_steps, margin, allow_landing, escalations)
    if part is None:
        return None
    check = verify_markov(part)
    if not check:
        raise MarkovConstructionError(check.detail)
    _, A_minus = build_transition(part)
    return escape_from_matrix(A_minus, part.beta), part


# ----------------------------------------------------------------------------
# bracketing for non-matching bases


@dataclass(frozen=True)
class Bracket:
    lo: float
    hi: float
    converged: bool
    certificates: dict = field(default_factory=dict)

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def __contains__(self, value: float) -> bool:
        return self.lo <= value <= self.hi


def _covering_bound(beta: BetaParam, depth: int) -> tuple[float, int]:
    from .survivor import survivor_iterate

    table = survivor_iterate(beta, depth)
    row = table.rows[-1]
    pieces = max(int(row.interval_count), 1)
    lb = math.log(float(beta.value))
    return 1 - math.log(pieces) / (row.n * lb) if row.n else 0.0, row.n


def approx_bracket(beta: BetaParam, depth: int = 40, target_width: float = 0.02,
                   max_steps: int = 10_000, margin=None, escalations: int = 1) -> Bracket:
    """Certified bounds ``E_lo <= E <= E_hi`` from perturbed holes.

    The perturbation is ``delta = 2**-k * |hole|`` for ``k = 4 .. min(depth,
    precision/2)``. Enlarged holes containing ``(a, b)`` have fewer survivors
    and bound the escape rate from above; shrunken holes bound it from below.
    The lower bound also uses the piece count of the survivor set at
    ``depth`` (number of surviving cylinders bounds the entropy).
    """
    with mp.workprec(beta.precision):
        ar = _Arith(beta)
        a, b = ar.a, min(ar.b, ar.one)
        length = b - a
    kmax = max(4, min(depth, beta.precision // 2))
    hi_val, lo_val = 1.0, 0.0
    certs: dict = {"upper": None, "lower": None, "depth": depth}

    def attempt(c, d):
        try:
            res = hole_escape(beta, c, d, max_steps, margin, True, escalations)
        except UndeterminedError:
            return None
        return res

    for k in range(4, kmax + 1):
        delta = length / 2 ** k
        for c, d in ((a - delta, b + delta), (a - delta, b), (a, b + delta)):
            if d > ar.one:
                d = ar.one
            res = attempt(c, d)
            if res is not None:
                if res[0].E < hi_val:
                    hi_val = res[0].E
                    certs["upper"] = {"k": k, "hole": (str(c), str(d)), "rho": res[0].rho,
                                      "cells": res[1].n_cells}
                break
        for c, d in ((a + delta, b - delta), (a + delta, b), (a, b - delta)):
            res = attempt(c, d)
            if res is not None:
                if res[0].E > lo_val:
                    lo_val = res[0].E
                    certs["lower"] = {"k": k, "hole": (str(c), str(d)), "rho": res[0].rho,
                                      "cells": res[1].n_cells}
                break
    cover, n = _covering_bound(beta, depth)
    certs["covering"] = {"E": cover, "n": n}
    if cover > lo_val:
        lo_val = cover
    if lo_val > hi_val:
        # both bounds are certified; only rounding can cross them
        mid = 0.5 * (lo_val + hi_val)
        lo_val = hi_val = mid
    return Bracket(lo_val, hi_val, hi_val - lo_val <= target_width, certs)


# ----------------------------------------------------------------------------
# dispatch


@dataclass(frozen=True)
class AnalysisConfig:
    depth: int = 40
    max_orbit: int = 10_000
    escalations: int = 1
    bracket_target: float = 0.02
    empirical: bool = True
    on_undetermined: str = "raise"  # or "bracket"


@dataclass
class AnalysisReport:
    beta: BetaParam
    classification: str  # analytic | matching | bracketed | beta=2
    rho: float | None
    entropy: float | None
    dim: float
    E: float
    e: float
    i_a: int | None = None
    i_b: int | None = None
    bracket: Bracket | None = None
    empirical: dict | None = None
    precision_bits: int = 128
    depth: int = 40
    partition_size: int | None = None

    @property
    def method(self) -> str:
        return {"analytic": "analytic", "matching": "matrix", "bracketed": "bracket",
                "beta=2": "beta2"}[self.classification]

    def to_dict(self) -> dict:
        return {
            "beta": mpmath.nstr(self.beta.value, 20, strip_zeros=False),
            "spec": self.beta.spec,
            "classification": self.classification,
            "i_a": self.i_a,
            "i_b": self.i_b,
            "rho": self.rho,
            "entropy": self.entropy,
            "dim": self.dim,
            "E": self.E,
            "e": self.e,
            "bracket": None if self.bracket is None else {"lo": self.bracket.lo, "hi": self.bracket.hi},
            "empirical": self.empirical,
            "precision_bits": self.precision_bits,
            "depth": self.depth,
        }


def _empirical(beta: BetaParam, depth: int) -> dict | None:
    from .survivor import escape_rate_empirical, survivor_iterate

    if depth < 4:
        return None
    table = survivor_iterate(beta, depth)
    fit = escape_rate_empirical(table)
    return {"E_hat": fit.E_hat, "window": list(fit.window), "residual": fit.residual}


def decide_escape(beta: BetaParam, config: AnalysisConfig | None = None) -> AnalysisReport:
    """Escape rate and dimension for one base.

    ``beta <= golden``: the hole reaches 1 and survivors shrink geometrically,
    so ``E = 1``. ``beta = 2``: empty hole, ``E = 0``. Otherwise the matrix
    route is used when both endpoints enter the hole and the bracket route
    when they do not.
    """
    cfg = config or AnalysisConfig()
    lb = math.log(float(beta.value))
    common = dict(precision_bits=beta.precision, depth=cfg.depth)
    if beta.num == 2:
        rep = AnalysisReport(beta, "beta=2", 2.0, math.log(2.0), 1.0, 0.0, 0.0, **common)
    elif _golden_or_below(beta):
        rep = AnalysisReport(beta, "analytic", 1.0, 0.0, 0.0, 1.0, lb, **common)
    else:
        match = detect_matching(beta, cfg.max_orbit, None, cfg.escalations)
        if match.in_F:
            part = build_partition(match.record_a, match.record_b, beta)
            check = verify_markov(part)
            if not check:
                raise MarkovConstructionError(check.detail)
            _, A_minus = build_transition(part)
            esc = escape_from_matrix(A_minus, part.beta)
            rep = AnalysisReport(beta, "matching", esc.rho, esc.entropy, esc.dim, esc.E, esc.e,
                                 i_a=match.i_a, i_b=match.i_b, partition_size=part.n_cells,
                                 **common)
        else:
            if match.status == "undetermined" and cfg.on_undetermined == "raise":
                raise UndeterminedError(
                    f"endpoint orbits undetermined for beta={beta.spec}; "
                    f"retry with --precision {2 * beta.precision * 2 ** cfg.escalations}"
                )
            br = approx_bracket(beta, cfg.depth, cfg.bracket_target, cfg.max_orbit, None,
                                cfg.escalations)
            E = br.mid
            rep = AnalysisReport(beta, "bracketed", None, None, 1 - E, E, E * lb, bracket=br,
                                 **common)
    if cfg.empirical:
        rep.empirical = _empirical(beta, cfg.depth)
    return rep
