"""Generator grids for the quantum special unitary group.

A representation is presented by its operator-valued generator grid:
entry (r, c) is the image of the (r, c) matrix generator, with r the
row (upper) index and c the column (lower) index.  Grids compose by
convolution,

    (φ * ψ)(r, c) = Σ_j φ(r, j) ⊗ ψ(j, c),

with the left grid contributing the leftmost tensor factors.

The elementary grid attached to the i-th simple reflection acts on one
truncated Fock factor:

    (i, i)     -> sqrt(1 - q^(2N+2)) S      step down
    (i+1, i+1) -> S* sqrt(1 - q^(2N+2))     step up
    (i, i+1)   -> -q^(N+1)
    (i+1, i)   -> q^N
    (k, k)     -> 1 for k outside {i, i+1}; every other entry is zero.

A reduced word [i_1, ..., i_L] composes left to right.  The torus grid
is diagonal with unimodular scalars on a 1-dimensional leg.  The
irreducible representations relevant here are indexed by an admissible
tuple a (which fixes a reduced word in stacked descending blocks) and
a torus angle vector t.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import reduce
from typing import Sequence

import numpy as np

from .fock import (
    FactorShape,
    TruncOp,
    identity,
    lower_q,
    raise_q,
    scalar_factor,
    tensor,
    weight_neg_qn1,
    weight_qn,
    zero,
)

__all__ = [
    "GenRep",
    "elementary_rep",
    "torus_rep",
    "counit_rep",
    "convolve",
    "weyl_word",
    "admissible_tuples",
    "word_rep",
    "full_rep",
    "path_evaluate",
]

UNIMODULAR_TOL = 1e-12


def _check_n(n) -> int:
    n = int(n)
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    return n


def _check_letter(i, n) -> int:
    i = int(i)
    if not 1 <= i <= n - 1:
        raise ValueError(f"letter must be in 1..{n - 1}, got {i}")
    return i


def _check_admissible(a, n) -> tuple[int, ...]:
    a = tuple(int(x) for x in a)
    m = len(a)
    if not 1 <= m <= n - 1:
        raise ValueError(f"tuple length must be in 1..{n - 1}, got {m}")
    for j, aj in enumerate(a, start=1):
        if not 1 <= aj <= n - j + 1:
            raise ValueError(f"component {j} must lie in 1..{n - j + 1}, got {aj}")
    return a


def _check_angles(t, n) -> tuple[complex, ...]:
    t = tuple(complex(z) for z in t)
    if not 1 <= len(t) <= n - 1:
        raise ValueError(f"angle vector length must be in 1..{n - 1}, got {len(t)}")
    for k, z in enumerate(t, start=1):
        if abs(abs(z) - 1.0) > UNIMODULAR_TOL:
            raise ValueError(f"angle {k} is not unimodular: |{z}| = {abs(z)}")
    return t


def _extend_angles(t, n) -> tuple[complex, ...]:
    """Pad an angle vector with ones up to length n - 1."""
    return tuple(t) + (1.0 + 0.0j,) * (n - 1 - len(t))


@dataclass
class GenRep:
    """Operator-valued n x n generator grid.

    entries[(r, c)] holds the image of generator (r, c); missing keys
    are structurally zero.  All present entries act on the same space.
    """

    n: int
    shape: FactorShape
    entries: dict[tuple[int, int], TruncOp] = field(default_factory=dict)

    def __post_init__(self):
        self.n = _check_n(self.n)
        for (r, c), op in self.entries.items():
            if not (1 <= r <= self.n and 1 <= c <= self.n):
                raise ValueError(f"grid key {(r, c)} out of range for n = {self.n}")
            if op.shape.dims != self.shape.dims:
                raise ValueError(
                    f"entry {(r, c)} has shape {op.shape.dims}, grid has {self.shape.dims}"
                )

    def op(self, r: int, c: int) -> TruncOp | None:
        return self.entries.get((r, c))

    def materialize(self, r: int, c: int) -> TruncOp:
        """The (r, c) entry, with structural zeros made explicit."""
        got = self.entries.get((r, c))
        return got if got is not None else zero(self.shape)


def elementary_rep(i: int, n: int, q, D: int) -> GenRep:
    """Grid of the i-th simple reflection on one Fock factor."""
    n = _check_n(n)
    i = _check_letter(i, n)
    down = lower_q(q, D)
    shape = down.shape
    entries: dict[tuple[int, int], TruncOp] = {}
    for k in range(1, n + 1):
        if k not in (i, i + 1):
            entries[(k, k)] = identity(shape)
    entries[(i, i)] = down
    entries[(i + 1, i + 1)] = raise_q(q, D)
    entries[(i, i + 1)] = weight_neg_qn1(q, D)
    entries[(i + 1, i)] = weight_qn(q, D)
    return GenRep(n, shape, entries)


def _torus_scalars(t: Sequence[complex], n: int) -> list[complex]:
    """Diagonal scalars of the torus grid, indexed by row 1..n."""
    out = [0j] * (n + 1)
    out[1] = np.conj(np.prod(t))
    for k in range(2, n + 1):
        out[k] = t[n - k]
    return out


def torus_rep(t: Sequence[complex], n: int) -> GenRep:
    """Diagonal grid of a torus point t in T^(n-1).

    Row k > 1 carries t_{n-k+1}; row 1 carries the conjugate of the
    product, so the grid lands in the special unitary quotient.
    """
    n = _check_n(n)
    t = _check_angles(t, n)
    if len(t) != n - 1:
        raise ValueError(f"torus point needs {n - 1} angles, got {len(t)}")
    scal = _torus_scalars(t, n)
    entries = {(k, k): scalar_factor(scal[k]) for k in range(1, n + 1)}
    return GenRep(n, FactorShape((1,)), entries)


def counit_rep(n: int) -> GenRep:
    """The trivial grid: identity matrix of scalars."""
    n = _check_n(n)
    entries = {(k, k): scalar_factor(1.0) for k in range(1, n + 1)}
    return GenRep(n, FactorShape((1,)), entries)


def convolve(a: GenRep, b: GenRep) -> GenRep:
    """Convolution product of two grids; a's factors come first."""
    if a.n != b.n:
        raise ValueError(f"grid sizes differ: {a.n} vs {b.n}")
    n = a.n
    entries: dict[tuple[int, int], TruncOp] = {}
    for r in range(1, n + 1):
        for c in range(1, n + 1):
            terms = [
                tensor([a.entries[(r, j)], b.entries[(j, c)]])
                for j in range(1, n + 1)
                if (r, j) in a.entries and (j, c) in b.entries
            ]
            if terms:
                entries[(r, c)] = reduce(lambda x, y: x + y, terms)
    shape = FactorShape(a.shape.dims + b.shape.dims)
    return GenRep(n, shape, entries)


def weyl_word(a: Sequence[int], n: int) -> list[int]:
    """Reduced word attached to an admissible tuple a.

    Blocks run j = m down to 1; block j lists the letters
    n-j, n-j-1, ..., a_j in descending order and is empty exactly when
    a_j = n - j + 1.
    """
    n = _check_n(n)
    a = _check_admissible(a, n)
    word: list[int] = []
    for j in range(len(a), 0, -1):
        word.extend(range(n - j, a[j - 1] - 1, -1))
    return word


def admissible_tuples(n: int, m: int) -> list[tuple[int, ...]]:
    """All tuples a with 1 <= a_j <= n - j + 1, in lexicographic order."""
    n = _check_n(n)
    m = int(m)
    if not 1 <= m <= n - 1:
        raise ValueError(f"m must be in 1..{n - 1}, got {m}")
    ranges = [range(1, n - j + 2) for j in range(1, m + 1)]
    return list(itertools.product(*ranges))


def word_rep(word: Sequence[int], n: int, q, D: int) -> GenRep:
    """Grid of a reduced word, composed left to right.

    The empty word gives the trivial grid.
    """
    n = _check_n(n)
    word = [_check_letter(i, n) for i in word]
    if not word:
        return counit_rep(n)
    out = elementary_rep(word[0], n, q, D)
    for i in word[1:]:
        out = convolve(out, elementary_rep(i, n, q, D))
    return out


def full_rep(t: Sequence[complex], a: Sequence[int], n: int, q, D: int) -> GenRep:
    """Grid of the irreducible representation indexed by (a, t).

    t supplies the first len(a) torus angles; the remaining ones are 1.
    The result has one scalar leg followed by one Fock factor per
    letter of the word.
    """
    n = _check_n(n)
    a = _check_admissible(a, n)
    t = _check_angles(t, n)
    if len(t) != len(a):
        raise ValueError(f"need {len(a)} angles to match the tuple, got {len(t)}")
    tau = torus_rep(_extend_angles(t, n), n)
    word = weyl_word(a, n)
    if not word:
        return tau
    return convolve(tau, word_rep(word, n, q, D))


def path_evaluate(
    word: Sequence[int], t: Sequence[complex], r: int, c: int, n: int, q, D: int
) -> TruncOp:
    """One grid entry of the (word, t) representation, summed over paths.

    Walks every route r = j_0 -> j_1 -> ... -> j_L = c through the
    letters, tensoring the per-letter factors along the way.  This
    route shares only the elementary operator table with the
    convolution product, so it serves as an independent cross-check.
    """
    n = _check_n(n)
    word = [_check_letter(i, n) for i in word]
    r, c = int(r), int(c)
    if not (1 <= r <= n and 1 <= c <= n):
        raise ValueError(f"entry ({r}, {c}) out of range for n = {n}")
    t = _check_angles(t, n)
    scal = _torus_scalars(_extend_angles(t, n), n)

    edge_cache: dict[int, dict[tuple[int, int], TruncOp]] = {}

    def edges(i: int) -> dict[tuple[int, int], TruncOp]:
        if i not in edge_cache:
            edge_cache[i] = {
                (i, i): lower_q(q, D),
                (i + 1, i + 1): raise_q(q, D),
                (i, i + 1): weight_neg_qn1(q, D),
                (i + 1, i): weight_qn(q, D),
            }
        return edge_cache[i]

    stay = identity(FactorShape((int(D),))) if word else None
    head = scalar_factor(scal[r])
    shape = FactorShape((1,) + (int(D),) * len(word))
    total: TruncOp | None = None

    def walk(pos: int, row: int, factors: list[TruncOp]) -> None:
        nonlocal total
        if pos == len(word):
            if row == c:
                term = tensor([head] + factors)
                total = term if total is None else total + term
            return
        i = word[pos]
        if row not in (i, i + 1):
            factors.append(stay)
            walk(pos + 1, row, factors)
            factors.pop()
            return
        for (rr, cc), op in edges(i).items():
            if rr == row:
                factors.append(op)
                walk(pos + 1, cc, factors)
                factors.pop()

    walk(0, r, [])
    return total if total is not None else zero(shape)
