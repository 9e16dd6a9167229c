"""Truncated Fock-space primitives.

Everything downstream acts on finite tensor products F_D ⊗ ... ⊗ F_D,
where F_D = span{e_0, ..., e_{D-1}} is the Fock space cut at level D.
This module owns the shape bookkeeping (factor dimensions, row-major
linearization), the basic operator constructors (truncated shift,
diagonal weights), tensor products, and windowed comparison.

Truncation contaminates the top levels of each factor: S S* = 1 holds
only away from the cut, while the weighted identity
S* (1 - q^(2N+2)) S + q^(2N) = 1 survives truncation exactly.
Comparisons are therefore made on a window: the span of basis vectors
whose index in every factor of dimension > 1 stays below D - margin.
A 1-dimensional factor stands for a scalar tensor leg and is ignored
by windows.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp

__all__ = [
    "QParam",
    "FactorShape",
    "Window",
    "TruncOp",
    "WindowReport",
    "identity",
    "zero",
    "scalar_factor",
    "shift_left",
    "diag_weight",
    "weight_qn",
    "weight_neg_qn1",
    "weight_root_gap",
    "lower_q",
    "raise_q",
    "tensor",
    "compress",
    "chain_basis",
    "windowed_max",
    "window_equal",
    "is_zero_op",
]


def _check_q(q) -> float:
    v = float(q)
    if not 0.0 < v < 1.0:
        raise ValueError(f"q must satisfy 0 < q < 1, got {q!r}")
    return v


def _check_dim(D) -> int:
    d = int(D)
    if d < 2:
        raise ValueError(f"Fock cutoff must be >= 2, got {D!r}")
    return d


@dataclass(frozen=True)
class QParam:
    """Deformation parameter, strictly between 0 and 1."""

    value: float

    def __post_init__(self):
        object.__setattr__(self, "value", _check_q(self.value))

    def __float__(self) -> float:
        return self.value


@dataclass(frozen=True)
class FactorShape:
    """Ordered factor dimensions of a truncated tensor product.

    Flat indices are row-major: the leftmost factor is the most
    significant digit.  Dimensions must be >= 1; dimension 1 marks a
    scalar leg.
    """

    dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims:
            raise ValueError("shape needs at least one factor")
        if any(d < 1 for d in dims):
            raise ValueError(f"factor dimensions must be >= 1, got {dims}")
        object.__setattr__(self, "dims", dims)

    @property
    def total(self) -> int:
        out = 1
        for d in self.dims:
            out *= d
        return out

    def multi_index(self, flat: int) -> tuple[int, ...]:
        return tuple(int(i) for i in np.unravel_index(flat, self.dims))

    def flat_index(self, multi: Sequence[int]) -> int:
        return int(np.ravel_multi_index(tuple(multi), self.dims))

    def window_mask(self, margin: int) -> np.ndarray:
        """Boolean mask over flat indices, True inside the window."""
        return _window_mask(self.dims, int(margin))


@lru_cache(maxsize=None)
def _window_mask(dims: tuple[int, ...], margin: int) -> np.ndarray:
    if margin < 0:
        raise ValueError(f"margin must be >= 0, got {margin}")
    for d in dims:
        if d > 1 and d - margin < 1:
            raise ValueError(f"margin {margin} leaves no window for factor dimension {d}")
    mask = np.ones(1, dtype=bool)
    for d in dims:
        keep = np.ones(1, dtype=bool) if d == 1 else (np.arange(d) < d - margin)
        mask = (mask[:, None] & keep[None, :]).reshape(-1)
    mask.flags.writeable = False
    return mask


@dataclass(frozen=True)
class Window:
    """Comparison window: drop the top `margin` levels of every factor.

    A product of two truncated generators moves an index by at most 2,
    so margin 2 shields all degree-2 relations; a word of length k
    needs margin >= k.
    """

    margin: int = 2

    def __post_init__(self):
        m = int(self.margin)
        if m < 0:
            raise ValueError(f"margin must be >= 0, got {self.margin}")
        object.__setattr__(self, "margin", m)


@dataclass(eq=False)
class TruncOp:
    """A linear operator on a truncated tensor product, stored CSR.

    All algebra stays sparse; call dense() only when the space is small
    enough to afford it.
    """

    mat: sp.csr_matrix
    shape: FactorShape

    def __post_init__(self):
        mat = sp.csr_matrix(self.mat, dtype=np.complex128)
        if mat.shape != (self.shape.total, self.shape.total):
            raise ValueError(
                f"matrix shape {mat.shape} does not match factor shape "
                f"{self.shape.dims} with total {self.shape.total}"
            )
        self.mat = mat

    def _same_space(self, other: TruncOp) -> None:
        if self.shape.dims != other.shape.dims:
            raise ValueError(f"shape mismatch: {self.shape.dims} vs {other.shape.dims}")

    def adjoint(self) -> TruncOp:
        return TruncOp(self.mat.conj().T.tocsr(), self.shape)

    def dense(self) -> np.ndarray:
        return self.mat.toarray()

    def max_abs(self) -> float:
        if self.mat.nnz == 0:
            return 0.0
        return float(np.abs(self.mat.data).max())

    def __matmul__(self, other: TruncOp) -> TruncOp:
        self._same_space(other)
        return TruncOp((self.mat @ other.mat).tocsr(), self.shape)

    def __add__(self, other: TruncOp) -> TruncOp:
        self._same_space(other)
        return TruncOp((self.mat + other.mat).tocsr(), self.shape)

    def __sub__(self, other: TruncOp) -> TruncOp:
        self._same_space(other)
        return TruncOp((self.mat - other.mat).tocsr(), self.shape)

    def __mul__(self, z) -> TruncOp:
        return TruncOp(self.mat * complex(z), self.shape)

    __rmul__ = __mul__

    def __neg__(self) -> TruncOp:
        return self * (-1.0)


def identity(shape: FactorShape) -> TruncOp:
    return TruncOp(sp.identity(shape.total, dtype=np.complex128, format="csr"), shape)


def zero(shape: FactorShape) -> TruncOp:
    return TruncOp(sp.csr_matrix((shape.total, shape.total), dtype=np.complex128), shape)


def scalar_factor(z: complex) -> TruncOp:
    """A 1x1 operator: multiplication by z on a scalar tensor leg."""
    return TruncOp(sp.csr_matrix(np.array([[z]], dtype=np.complex128)), FactorShape((1,)))


def shift_left(D: int) -> TruncOp:
    """Truncated left shift S: S e_0 = 0, S e_k = e_{k-1}.

    The adjoint S* is the truncated right shift, killing e_{D-1}.
    """
    D = _check_dim(D)
    return TruncOp(sp.eye(D, k=1, dtype=np.complex128, format="csr"), FactorShape((D,)))


def diag_weight(f: Callable[[float, int], complex], q, D: int) -> TruncOp:
    """Diagonal operator diag(f(q, k)) for k = 0..D-1."""
    qv = _check_q(q)
    D = _check_dim(D)
    vals = np.array([f(qv, k) for k in range(D)], dtype=np.complex128)
    return TruncOp(sp.diags(vals).tocsr(), FactorShape((D,)))


def weight_qn(q, D: int) -> TruncOp:
    """diag(q^k): the weight q^N."""
    return diag_weight(lambda qv, k: qv**k, q, D)


def weight_neg_qn1(q, D: int) -> TruncOp:
    """diag(-q^(k+1)): the weight -q^(N+1)."""
    return diag_weight(lambda qv, k: -(qv ** (k + 1)), q, D)


def weight_root_gap(q, D: int) -> TruncOp:
    """diag(sqrt(1 - q^(2k))): the weight sqrt(1 - q^(2N)); kills e_0."""
    return diag_weight(lambda qv, k: np.sqrt(1.0 - qv ** (2 * k)), q, D)


def lower_q(q, D: int) -> TruncOp:
    """sqrt(1 - q^(2N+2)) S: one step down, e_k -> sqrt(1 - q^(2k)) e_{k-1}."""
    return diag_weight(lambda qv, k: np.sqrt(1.0 - qv ** (2 * k + 2)), q, D) @ shift_left(D)


def raise_q(q, D: int) -> TruncOp:
    """S* sqrt(1 - q^(2N+2)): one step up, e_k -> sqrt(1 - q^(2k+2)) e_{k+1}.

    Equal to sqrt(1 - q^(2N)) S* exactly, truncation included.
    """
    return shift_left(D).adjoint() @ diag_weight(
        lambda qv, k: np.sqrt(1.0 - qv ** (2 * k + 2)), q, D
    )


def tensor(ops: Sequence[TruncOp]) -> TruncOp:
    """Kronecker product, leftmost factor most significant."""
    if not ops:
        raise ValueError("tensor() needs at least one operator")
    mat = ops[0].mat
    dims = list(ops[0].shape.dims)
    for op in ops[1:]:
        mat = sp.kron(mat, op.mat, format="csr")
        dims.extend(op.shape.dims)
    return TruncOp(sp.csr_matrix(mat), FactorShape(tuple(dims)))


def compress(op: TruncOp, basis, shape: FactorShape) -> TruncOp:
    """Restrict to the column span of an orthonormal basis: V* A V.

    The basis may be dense or sparse (coordinate bases stay sparse so
    large spaces never materialize densely).
    """
    if basis.ndim != 2 or basis.shape[0] != op.shape.total:
        raise ValueError(
            f"basis is {basis.shape}, expected ({op.shape.total}, k)"
        )
    if basis.shape[1] != shape.total:
        raise ValueError(
            f"basis has {basis.shape[1]} columns but target shape totals {shape.total}"
        )
    out = basis.conj().T @ (op.mat @ basis)
    return TruncOp(sp.csr_matrix(out), shape)


def chain_basis(outer, inner):
    """Compose restriction bases: ambient columns of the inner span."""
    if outer.shape[1] != inner.shape[0]:
        raise ValueError(
            f"cannot chain bases of shapes {outer.shape} and {inner.shape}"
        )
    if sp.issparse(outer) or sp.issparse(inner):
        return sp.csc_matrix(outer) @ sp.csc_matrix(inner)
    return outer @ inner


@dataclass(frozen=True)
class WindowReport:
    """Outcome of a windowed comparison."""

    equal: bool
    max_in_window: float
    max_overall: float
    margin: int
    tol: float

    def __bool__(self) -> bool:
        return self.equal


def windowed_max(op: TruncOp, window: Window) -> float:
    """Largest |entry| over (row, col) pairs that both lie in the window."""
    mask = op.shape.window_mask(window.margin)
    coo = op.mat.tocoo()
    if coo.nnz == 0:
        return 0.0
    keep = mask[coo.row] & mask[coo.col]
    if not keep.any():
        return 0.0
    return float(np.abs(coo.data[keep]).max())


def window_equal(a: TruncOp, b: TruncOp, window: Window, tol: float = 1e-10) -> WindowReport:
    """Compare two operators inside the window; the overall max is kept
    for diagnostics but does not affect the verdict."""
    a._same_space(b)
    diff = a - b
    w = windowed_max(diff, window)
    return WindowReport(w <= tol, w, diff.max_abs(), window.margin, tol)


def is_zero_op(op: TruncOp, window: Window, tol: float = 1e-8) -> bool:
    """Is the operator numerically zero on the window?"""
    return windowed_max(op, window) <= tol
