"""Lexicographic subshifts ``Z_t``: sequences whose every length-p window lies
between the bitwise complement of ``t`` and ``t``.

The entropy comes from the Perron root of a vertex shift on (p-1)-words,
trimmed to its essential part. :func:`count_words` is a brute-force oracle
that enumerates admissible words directly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .beta_core import BetaParam, DigitWord
from .markov_escape import TransitionMatrix, perron_root

__all__ = [
    "Block",
    "SFTResult",
    "complement",
    "window_allowed",
    "build_transfer",
    "sft_entropy",
    "count_words",
    "is_primitive",
    "escape_for_admissible",
]

EXHAUSTIVE_CAP = 2 ** 24


def complement(w) -> DigitWord:
    return DigitWord(1 - d for d in DigitWord(w))


@dataclass(frozen=True)
class Block:
    word: DigitWord

    def __init__(self, word):
        w = DigitWord(word)
        if not w:
            raise ValueError("block must be non-empty")
        if w[0] != 1:
            raise ValueError(f"block {w} is smaller than its complement; the subshift is empty")
        object.__setattr__(self, "word", w)

    @property
    def p(self) -> int:
        return len(self.word)

    def __str__(self) -> str:
        return str(self.word)


def _block(t) -> Block:
    return t if isinstance(t, Block) else Block(t)


def window_allowed(w, t) -> bool:
    """``complement(t) <= w <= t`` in lexicographic order."""
    t = _block(t).word
    w = DigitWord(w)
    if len(w) != len(t):
        raise ValueError("window and block lengths differ")
    return complement(t) <= w <= t


def _allowed_table(t: DigitWord) -> np.ndarray:
    # allowed[v] for every p-bit integer v (most significant bit first)
    p = len(t)
    lo = int(str(complement(t)), 2)
    hi = int(str(t), 2)
    v = np.arange(2 ** p)
    return (v >= lo) & (v <= hi)


@dataclass(frozen=True)
class SFTResult:
    matrix: TransitionMatrix
    empty: bool


def build_transfer(t) -> SFTResult:
    """Vertex shift presenting ``Z_t``, trimmed to vertices on bi-infinite paths."""
    t = _block(t).word
    p = len(t)
    allowed = _allowed_table(t)
    if p == 1:
        # the only valid block is "1": both single symbols allowed, full 2-shift
        labels = ("0", "1")
        M = np.ones((2, 2), dtype=np.int8)
    else:
        q = p - 1
        n = 2 ** q
        labels = tuple(format(i, f"0{q}b") for i in range(n))
        rows, cols = [], []
        mask = n - 1
        for u in range(n):
            for bit in (0, 1):
                window = (u << 1) | bit
                if allowed[window]:
                    rows.append(u)
                    cols.append(window & mask)
        M = sp.csr_matrix((np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(n, n)).toarray()
    keep = np.ones(M.shape[0], dtype=bool)
    while True:
        sub = M[np.ix_(keep, keep)]
        out_deg = sub.sum(axis=1) > 0
        in_deg = sub.sum(axis=0) > 0
        alive = out_deg & in_deg
        if alive.all():
            break
        idx = np.flatnonzero(keep)
        keep[idx[~alive]] = False
        if not keep.any():
            break
    idx = np.flatnonzero(keep)
    sub = M[np.ix_(idx, idx)]
    mat = TransitionMatrix(tuple(labels[i] for i in idx), sp.csr_matrix(sub))
    return SFTResult(mat, empty=len(idx) == 0)


def sft_entropy(t) -> float:
    """Topological entropy ``log rho`` of ``Z_t`` (0 for an empty shift)."""
    res = build_transfer(t)
    if res.empty:
        return 0.0
    rho = perron_root(res.matrix)
    return math.log(rho) if rho > 0 else 0.0


def is_primitive(t) -> bool:
    res = build_transfer(t)
    if res.empty:
        return False
    A = res.matrix.matrix
    ncomp, _ = connected_components(A, directed=True, connection="strong")
    if ncomp != 1:
        return False
    n = A.shape[0]
    M = (A.toarray() > 0).astype(np.int64)
    P = M.copy()
    # Wielandt: primitive iff M**k > 0 for k = (n-1)**2 + 1
    for _ in range((n - 1) ** 2):
        P = ((P @ M) > 0).astype(np.int64)
    return bool(P.all())


def count_words(t, n: int) -> int:
    """Number of length-n binary words all of whose p-windows are allowed.

    Words are enumerated level by level; more than ``2**24`` surviving
    prefixes at any level raises :class:`OverflowError`.
    """
    t = _block(t).word
    if n < 0:
        raise ValueError("n must be non-negative")
    p = len(t)
    if n > 62:
        raise OverflowError("word length too large for exhaustive counting")
    if n < p:
        return 2 ** n
    allowed = _allowed_table(t)
    words = np.arange(2 ** p, dtype=np.int64)[allowed]
    mask = (1 << p) - 1
    for _ in range(p, n):
        if 2 * words.size > EXHAUSTIVE_CAP:
            raise OverflowError(
                "exhaustive enumeration exceeds 2**24 prefixes; use the transfer matrix"
            )
        ext = np.concatenate([words << 1, (words << 1) | 1])
        words = ext[allowed[ext & mask]]
    return int(words.size)


def escape_for_admissible(beta: BetaParam, t, tol: float = 1e-12) -> float:
    """``E = 1 - h(Z_t) / log(beta)``; the caller vouches that ``beta`` belongs to ``t``."""
    h = sft_entropy(t)
    E = 1 - h / math.log(float(beta.value))
    if not (-tol <= E <= 1 + tol):
        raise ValueError(f"escape rate {E} outside [0, 1]: block {t} does not fit beta {beta}")
    return min(max(E, 0.0), 1.0)
