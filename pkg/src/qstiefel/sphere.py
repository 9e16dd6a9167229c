"""Operator tuples satisfying the odd quantum sphere relations.

A tuple (T_1, ..., T_n) on a truncated space is checked against the
four defining families

    swap:          T_i T_j = q T_j T_i                    (j < i)
    adjoint_swap:  T_i* T_j = q T_j T_i*                  (i != j)
    defect:        T_i* T_i - T_i T_i* = (1-q^2) Σ_{j>i} T_j T_j*
    sphere_sum:    Σ_i T_i T_i* = 1

The largest index ℓ with a nonzero generator is the rank; T_ℓ is then
normal and ω = T_ℓ* T_ℓ has spectrum inside {q^(2k) : k >= 0} ∪ {0},
with nothing in the gaps.  The unit eigenspace of ω is the ground
space; T_1, ..., T_{ℓ-1} ladder it across the whole representation.
The scalar by which T_ℓ acts on the ground space is the angle, and
(rank, angle) classifies the irreducible tuples up to unitary
equivalence.  On a truncated space all of this holds on a window away
from the cut.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .errors import (
    ClassificationError,
    InconsistentRepresentationError,
    NotIrreducibleError,
    NotIsomorphicError,
    SpectrumViolationError,
)
from .fock import (
    FactorShape,
    TruncOp,
    Window,
    WindowReport,
    compress,
    identity,
    raise_q,
    scalar_factor,
    tensor,
    weight_qn,
    window_equal,
    windowed_max,
    zero,
)

__all__ = [
    "OpTuple",
    "RelationInstance",
    "RelationReport",
    "SpectrumReport",
    "EigenBasis",
    "LadderBasis",
    "Intertwiner",
    "check_sphere_relations",
    "rank_of",
    "omega_of",
    "truncation_floor",
    "omega_spectrum",
    "unit_eigenspace",
    "ground_space",
    "angle_of",
    "ladder",
    "check_power_identity",
    "build_intertwiner",
    "phase_scale",
    "model_tuple",
]

DENSE_EIG_MAX = 4096
OFFDIAG_TOL = 1e-10
SNAP_TOL = 1e-10
ZERO_TOL = 1e-8
SCALAR_TOL = 1e-6


@dataclass
class OpTuple:
    """Operator tuple (T_1, ..., T_n) on one truncated space."""

    ops: tuple[TruncOp, ...]
    q: float

    def __post_init__(self):
        ops = tuple(self.ops)
        if not ops:
            raise ValueError("tuple needs at least one operator")
        dims = ops[0].shape.dims
        for k, op in enumerate(ops[1:], start=2):
            if op.shape.dims != dims:
                raise ValueError(f"component {k} has shape {op.shape.dims}, expected {dims}")
        qv = float(self.q)
        if not 0.0 < qv < 1.0:
            raise ValueError(f"q must satisfy 0 < q < 1, got {self.q!r}")
        self.ops = ops
        self.q = qv

    @property
    def n(self) -> int:
        return len(self.ops)

    @property
    def shape(self) -> FactorShape:
        return self.ops[0].shape

    def op(self, i: int) -> TruncOp:
        """1-based component access."""
        if not 1 <= i <= self.n:
            raise ValueError(f"component index {i} out of range 1..{self.n}")
        return self.ops[i - 1]


@dataclass(frozen=True)
class RelationInstance:
    """One checked relation: windowed and overall residual."""

    name: str
    in_window: float
    overall: float


@dataclass
class RelationReport:
    """Residuals of a family of relations on a window."""

    instances: list[RelationInstance]
    margin: int
    tol: float

    @property
    def max_residual(self) -> float:
        return max((r.in_window for r in self.instances), default=0.0)

    @property
    def worst(self) -> RelationInstance | None:
        if not self.instances:
            return None
        return max(self.instances, key=lambda r: r.in_window)

    def passed(self) -> bool:
        return self.max_residual <= self.tol

    def families(self) -> dict[str, float]:
        """Max windowed residual per family (name prefix before '[')."""
        out: dict[str, float] = {}
        for r in self.instances:
            fam = r.name.split("[", 1)[0]
            out[fam] = max(out.get(fam, 0.0), r.in_window)
        return out

    def by_name(self) -> dict[str, RelationInstance]:
        return {r.name: r for r in self.instances}


def _instance(name: str, lhs: TruncOp, rhs: TruncOp, window: Window) -> RelationInstance:
    diff = lhs - rhs
    return RelationInstance(name, windowed_max(diff, window), diff.max_abs())


def check_sphere_relations(
    tup: OpTuple, window: Window | None = None, tol: float = 1e-10
) -> RelationReport:
    """Windowed residuals of the four defining families."""
    window = window if window is not None else Window()
    n, q = tup.n, tup.q
    one = identity(tup.shape)
    instances: list[RelationInstance] = []
    for i in range(1, n + 1):
        Ti = tup.op(i)
        for j in range(1, i):
            Tj = tup.op(j)
            instances.append(_instance(f"swap[i={i},j={j}]", Ti @ Tj, q * (Tj @ Ti), window))
    for i in range(1, n + 1):
        Ti = tup.op(i)
        for j in range(1, n + 1):
            if j == i:
                continue
            Tj = tup.op(j)
            instances.append(
                _instance(
                    f"adjoint_swap[i={i},j={j}]",
                    Ti.adjoint() @ Tj,
                    q * (Tj @ Ti.adjoint()),
                    window,
                )
            )
    for i in range(1, n + 1):
        Ti = tup.op(i)
        tail = zero(tup.shape)
        for j in range(i + 1, n + 1):
            Tj = tup.op(j)
            tail = tail + Tj @ Tj.adjoint()
        lhs = Ti.adjoint() @ Ti - Ti @ Ti.adjoint()
        instances.append(_instance(f"defect[i={i}]", lhs, (1.0 - q**2) * tail, window))
    total = zero(tup.shape)
    for i in range(1, n + 1):
        Ti = tup.op(i)
        total = total + Ti @ Ti.adjoint()
    instances.append(_instance("sphere_sum", total, one, window))
    return RelationReport(instances, window.margin, tol)


def rank_of(tup: OpTuple, window: Window | None = None, tol: float = ZERO_TOL) -> int:
    """Largest index whose generator is nonzero on the window."""
    window = window if window is not None else Window()
    for i in range(tup.n, 0, -1):
        if windowed_max(tup.op(i), window) > tol:
            return i
    raise InconsistentRepresentationError("every generator vanishes on the window")


def omega_of(tup: OpTuple, rank: int | None = None) -> TruncOp:
    """ω = T_ℓ* T_ℓ for the rank generator."""
    ell = rank if rank is not None else rank_of(tup)
    T = tup.op(ell)
    return T.adjoint() @ T


def truncation_floor(shape: FactorShape, q: float) -> float:
    """q^(2(D-2)) for the largest live factor dimension D.

    Below this level, truncated eigenvalues are artifacts of the cut
    and carry no spectral information.
    """
    live = [d for d in shape.dims if d > 1]
    if not live:
        return 0.0
    return float(q) ** (2 * (max(live) - 2))


def _eigenvalues_of(op: TruncOp) -> np.ndarray:
    """Real eigenvalues of a Hermitian operator; descending order.

    Dense up to DENSE_EIG_MAX dimensions, otherwise the operator must
    be numerically diagonal.
    """
    total = op.shape.total
    if total <= DENSE_EIG_MAX:
        vals = np.linalg.eigvalsh(op.dense())
    else:
        coo = op.mat.tocoo()
        off = coo.row != coo.col
        if off.any() and np.abs(coo.data[off]).max() > OFFDIAG_TOL:
            raise ClassificationError(
                f"operator on {total} dimensions is not numerically diagonal; "
                f"dense eigensolve is capped at {DENSE_EIG_MAX}"
            )
        vals = np.real(op.mat.diagonal())
    return np.sort(vals)[::-1]


@dataclass
class SpectrumReport:
    """Eigenvalues of ω matched against the lattice {q^(2k)}."""

    eigenvalues: np.ndarray
    exponents: list[int | None]
    floor: float
    tol: float
    conforms: bool
    worst_off_lattice: float

    @property
    def below_floor(self) -> int:
        return sum(1 for k, lam in zip(self.exponents, self.eigenvalues) if k is None)

    def histogram(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for k in self.exponents:
            if k is not None:
                out[k] = out.get(k, 0) + 1
        return out


def omega_spectrum(
    tup: OpTuple, rank: int | None = None, tol: float = 1e-8, strict: bool = False
) -> SpectrumReport:
    """Spectrum of ω and its verdict against the spectral law.

    Every eigenvalue must lie within tol of some q^(2k), k >= 0, or
    below the truncation floor; anything else sits in a forbidden gap.
    """
    om = omega_of(tup, rank)
    q = tup.q
    vals = _eigenvalues_of(om)
    floor = truncation_floor(om.shape, q)
    exps: list[int | None] = []
    conforms = True
    worst = 0.0
    offender = None
    for lam in vals:
        k = None
        if lam > 0.0:
            k = max(0, int(round(np.log(lam) / (2.0 * np.log(q)))))
        if k is not None and abs(lam - q ** (2 * k)) <= tol:
            exps.append(k)
            worst = max(worst, abs(lam - q ** (2 * k)))
        elif -tol <= lam <= floor + tol:
            exps.append(None)
        else:
            conforms = False
            exps.append(None)
            if offender is None:
                offender = lam
    if strict and not conforms:
        raise SpectrumViolationError(
            f"eigenvalue {offender} lies in a forbidden spectral gap (floor {floor})"
        )
    return SpectrumReport(vals, exps, floor, tol, conforms, worst)


@dataclass
class EigenBasis:
    """Orthonormal basis of a subspace, with its factor structure.

    The matrix is ambient x dim; sparse when the basis consists of
    coordinate vectors, dense otherwise.
    """

    matrix: np.ndarray | sp.spmatrix
    shape: FactorShape

    @property
    def ambient(self) -> int:
        return int(self.matrix.shape[0])

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[1])

    def column(self, j: int) -> np.ndarray:
        col = self.matrix[:, j]
        if sp.issparse(col):
            return np.asarray(col.todense()).ravel()
        return np.asarray(col).ravel()

    def dense(self) -> np.ndarray:
        if sp.issparse(self.matrix):
            return np.asarray(self.matrix.todense())
        return np.asarray(self.matrix)


def _coordinate_shape(shape: FactorShape, idxs: np.ndarray) -> FactorShape:
    """Factor structure of a coordinate-vector span.

    When the index set is a sub-product (each factor either pinned to
    one value or running over its full range), the restricted space
    inherits the free factors; otherwise it is reported flat.
    """
    k = len(idxs)
    multi = np.array(np.unravel_index(np.asarray(idxs), shape.dims))
    per = [np.unique(row) for row in multi]
    count = 1
    for u in per:
        count *= len(u)
    if count == k and all(len(u) in (1, d) for u, d in zip(per, shape.dims)):
        grid = np.array(np.meshgrid(*per, indexing="ij")).reshape(len(per), -1)
        flat = np.sort(np.ravel_multi_index(tuple(grid), shape.dims))
        if np.array_equal(flat, np.asarray(idxs)):
            dims = tuple(int(d) for u, d in zip(per, shape.dims) if len(u) == d and d > 1)
            return FactorShape(dims if dims else (1,))
    return FactorShape((k,))


def unit_eigenspace(op: TruncOp, tol: float = 1e-8) -> EigenBasis:
    """Orthonormal basis of the eigenspace of op at eigenvalue 1.

    Dense eigensolve up to DENSE_EIG_MAX dimensions; above that the
    operator must be numerically diagonal (true for every built
    representation, where ω is a diagonal word) and the basis consists
    of coordinate vectors.  Output is deterministic: bases snap to
    coordinate vectors whenever the span allows it, otherwise columns
    are ordered by dominant index with positive real dominant entry.
    """
    total = op.shape.total
    if total <= DENSE_EIG_MAX:
        evals, evecs = np.linalg.eigh(op.dense())
        sel = np.nonzero(np.abs(evals - 1.0) <= tol)[0]
        if sel.size == 0:
            raise SpectrumViolationError(
                f"no eigenvalue within {tol} of 1 (closest: {evals[np.abs(evals - 1).argmin()]})"
            )
        V = evecs[:, sel]
        mass = np.sum(np.abs(V) ** 2, axis=1)
        hot = np.nonzero(mass >= 1.0 - SNAP_TOL)[0]
        cold = np.delete(mass, hot)
        if hot.size == V.shape[1] and (cold.size == 0 or cold.max() <= SNAP_TOL):
            W = np.zeros((total, hot.size), dtype=np.complex128)
            W[hot, np.arange(hot.size)] = 1.0
            return EigenBasis(W, _coordinate_shape(op.shape, hot))
        dom = np.argmax(np.abs(V), axis=0)
        order = np.argsort(dom, kind="stable")
        V = V[:, order]
        dom = dom[order]
        piv = V[dom, np.arange(V.shape[1])]
        V = V * (np.conj(piv) / np.abs(piv))[None, :]
        return EigenBasis(V, FactorShape((V.shape[1],)))
    coo = op.mat.tocoo()
    off = coo.row != coo.col
    if off.any() and np.abs(coo.data[off]).max() > OFFDIAG_TOL:
        raise ClassificationError(
            f"operator on {total} dimensions is not numerically diagonal; "
            f"dense eigensolve is capped at {DENSE_EIG_MAX}"
        )
    diag = op.mat.diagonal()
    idxs = np.nonzero(np.abs(diag - 1.0) <= tol)[0]
    if idxs.size == 0:
        raise SpectrumViolationError(f"no diagonal entry within {tol} of 1")
    data = np.ones(idxs.size, dtype=np.complex128)
    W = sp.csc_matrix((data, (idxs, np.arange(idxs.size))), shape=(total, idxs.size))
    return EigenBasis(W, _coordinate_shape(op.shape, idxs))


def ground_space(tup: OpTuple, rank: int | None = None, tol: float = 1e-8) -> EigenBasis:
    """Unit eigenspace of ω = T_ℓ* T_ℓ."""
    return unit_eigenspace(omega_of(tup, rank), tol)


def angle_of(
    tup: OpTuple,
    rank: int | None = None,
    basis: EigenBasis | None = None,
    tol: float = 1e-8,
    scalar_tol: float = SCALAR_TOL,
) -> complex:
    """The unimodular scalar by which T_ℓ acts on the ground space.

    A non-scalar action (a direct sum mixing different angles) raises
    InconsistentRepresentationError.
    """
    ell = rank if rank is not None else rank_of(tup)
    W = basis if basis is not None else ground_space(tup, ell, tol)
    M = compress(tup.op(ell), W.matrix, FactorShape((W.dim,))).dense()
    tr = complex(np.trace(M)) / W.dim
    dev = float(np.abs(M - tr * np.eye(W.dim)).max())
    if dev > scalar_tol:
        raise InconsistentRepresentationError(
            f"rank generator is not scalar on the ground space (deviation {dev:.3e})"
        )
    mag = abs(tr)
    if abs(mag - 1.0) > scalar_tol:
        raise InconsistentRepresentationError(
            f"ground-space scalar has modulus {mag}, expected 1"
        )
    return tr / mag


@dataclass
class LadderBasis:
    """Normalized ladder vectors indexed by their exponent tuples."""

    alphas: list[tuple[int, ...]]
    vectors: np.ndarray
    norms: np.ndarray

    @property
    def count(self) -> int:
        return len(self.alphas)


def ladder(
    tup: OpTuple,
    max_total: int,
    rank: int | None = None,
    basis: EigenBasis | None = None,
    drop_tol: float = 1e-9,
) -> LadderBasis:
    """Vectors T_1^α1 ... T_{ℓ-1}^α(ℓ-1) h for |α| <= max_total.

    h is the canonical ground vector (the tuple must be irreducible);
    vectors eaten by the cut (norm below drop_tol) are dropped, the
    rest are normalized.
    """
    ell = rank if rank is not None else rank_of(tup)
    W = basis if basis is not None else ground_space(tup, ell)
    if W.dim != 1:
        raise NotIrreducibleError(f"ground space has dimension {W.dim}, expected 1")
    h = W.column(0)
    mats = [tup.op(i).mat for i in range(1, ell)]
    alphas: list[tuple[int, ...]] = []
    cols: list[np.ndarray] = []
    norms: list[float] = []
    grid = itertools.product(range(max_total + 1), repeat=max(ell - 1, 0))
    for alpha in sorted(grid, key=lambda a: (sum(a), a)):
        if sum(alpha) > max_total:
            continue
        v = h
        for j in range(ell - 2, -1, -1):
            for _ in range(alpha[j]):
                v = mats[j] @ v
        nrm = float(np.linalg.norm(v))
        if nrm < drop_tol:
            continue
        alphas.append(alpha)
        cols.append(v / nrm)
        norms.append(nrm)
    vectors = np.stack(cols, axis=1) if cols else np.zeros((tup.shape.total, 0), complex)
    return LadderBasis(alphas, vectors, np.array(norms))


def check_power_identity(
    tup: OpTuple, i: int, m: int, window: Window | None = None, tol: float = 1e-10
) -> WindowReport:
    """Windowed check of the power identity

        T_i* T_i^m = T_i^m T_i* + (1 - q^(2m)) T_i^(m-1) Σ_{j>i} T_j T_j*.

    Words here have degree m+1, so the window margin defaults to m+1.
    """
    if m < 1:
        raise ValueError(f"power must be >= 1, got {m}")
    window = window if window is not None else Window(m + 1)
    q = tup.q
    Ti = tup.op(i)
    pow_m = Ti
    for _ in range(m - 1):
        pow_m = pow_m @ Ti
    lhs = Ti.adjoint() @ pow_m
    tail = zero(tup.shape)
    for j in range(i + 1, tup.n + 1):
        Tj = tup.op(j)
        tail = tail + Tj @ Tj.adjoint()
    pow_m1 = identity(tup.shape)
    for _ in range(m - 1):
        pow_m1 = pow_m1 @ Ti
    rhs = pow_m @ Ti.adjoint() + (1.0 - q ** (2 * m)) * (pow_m1 @ tail)
    return window_equal(lhs, rhs, window, tol)


@dataclass
class Intertwiner:
    """Ladder-span intertwiner between two tuples of equal rank and angle."""

    matrix: np.ndarray
    residual: float
    angle_gap: float


def build_intertwiner(
    a: OpTuple,
    b: OpTuple,
    max_total: int,
    tol: float = 1e-8,
) -> Intertwiner:
    """Map U with U T_i ≈ T'_i U, built on matched ladder vectors.

    Raises NotIsomorphicError when the tuples have different lengths,
    ranks, or angles (beyond tol).  The residual is the worst norm of
    (U T_i - T'_i U) applied to ladder vectors that stay inside the
    computed ladder after one more step.
    """
    if a.n != b.n:
        raise NotIsomorphicError(f"tuple lengths differ: {a.n} vs {b.n}")
    ra, rb = rank_of(a), rank_of(b)
    if ra != rb:
        raise NotIsomorphicError(f"ranks differ: {ra} vs {rb}")
    ta, tb = angle_of(a, ra), angle_of(b, rb)
    gap = abs(ta - tb)
    if gap > tol:
        raise NotIsomorphicError(f"angles differ by {gap:.3e}")
    la = ladder(a, max_total, ra)
    lb = ladder(b, max_total, rb)
    pos_b = {alpha: j for j, alpha in enumerate(lb.alphas)}
    matched = [(alpha, j, pos_b[alpha]) for j, alpha in enumerate(la.alphas) if alpha in pos_b]
    if not matched:
        raise NotIsomorphicError("no ladder vectors survive on both sides")
    U = np.zeros((b.shape.total, a.shape.total), dtype=np.complex128)
    for _, ja, jb in matched:
        U += np.outer(lb.vectors[:, jb], np.conj(la.vectors[:, ja]))
    residual = 0.0
    deep = [(alpha, ja) for alpha, ja, _ in matched if sum(alpha) <= max_total - 1]
    for i in range(1, a.n + 1):
        Ma, Mb = a.op(i).mat, b.op(i).mat
        for alpha, ja in deep:
            v = la.vectors[:, ja]
            diff = U @ (Ma @ v) - Mb @ (U @ v)
            residual = max(residual, float(np.linalg.norm(diff)))
    return Intertwiner(U, residual, gap)


def phase_scale(tup: OpTuple, phases: Sequence[complex]) -> OpTuple:
    """Rescale each generator by a unimodular phase.

    The defining relations are invariant under this, so the result is
    again a valid tuple, with the angle scaled by the rank phase.
    """
    phases = tuple(complex(z) for z in phases)
    if len(phases) != tup.n:
        raise ValueError(f"need {tup.n} phases, got {len(phases)}")
    for k, z in enumerate(phases, start=1):
        if abs(abs(z) - 1.0) > 1e-12:
            raise ValueError(f"phase {k} is not unimodular: |{z}| = {abs(z)}")
    return OpTuple(tuple(op * z for op, z in zip(tup.ops, phases)), tup.q)


def model_tuple(n: int, rank: int, t: complex, q, D: int) -> OpTuple:
    """The standard tuple of a given rank and angle.

    On (rank-1) Fock factors (a scalar leg when rank = 1):

        T_l = t (q^N)^⊗(l-1) ⊗ sqrt(1-q^(2N)) S* ⊗ 1 ⊗ ...   l < rank
        T_rank = t (q^N)^⊗(rank-1),  and T_l = 0 above the rank.

    Every irreducible tuple of this rank and angle is unitarily
    equivalent to this one.
    """
    n = int(n)
    rank = int(rank)
    if not 1 <= rank <= n:
        raise ValueError(f"rank must be in 1..{n}, got {rank}")
    t = complex(t)
    if abs(abs(t) - 1.0) > 1e-12:
        raise ValueError(f"angle is not unimodular: |{t}| = {abs(t)}")
    qv = float(q)
    if rank == 1:
        shape = FactorShape((1,))
        ops = [t * identity(shape)] + [zero(shape) for _ in range(n - 1)]
        return OpTuple(tuple(ops), qv)
    qn = weight_qn(qv, D)
    up = raise_q(qv, D)
    one = identity(qn.shape)
    ops = []
    for l in range(1, rank):
        factors = [qn] * (l - 1) + [up] + [one] * (rank - 1 - l)
        ops.append(t * tensor(factors))
    ops.append(t * tensor([qn] * (rank - 1)))
    shape = ops[0].shape
    for _ in range(rank + 1, n + 1):
        ops.append(zero(shape))
    return OpTuple(tuple(ops), qv)
