"""Quantum Stiefel manifold representations and their classification.

The generators are the last m rows of the quantum special unitary
generator grid: w_k^i = u_k^i for rows i = n-m+1..n and columns
k = 1..n.  On a representation built from an admissible tuple a and
torus angles t they satisfy nine relation families (c1..c9 in the
reports):

    c1: w_k^i w_k^j = q w_k^j w_k^i                       (i < j)
    c2: w_k^i w_l^i = q w_l^i w_k^i                       (k < l)
    c3: w_k^i w_l^j = w_l^j w_k^i                         (i < j, k > l)
    c4: w_k^i w_l^j = w_l^j w_k^i + (1/q - q) w_l^i w_k^j (i > j, k > l)
    c5: (w_k^i)* w_l^j = w_l^j (w_k^i)*                   (i != j, k != l)
    c6: (w_k^i)* w_l^i + (1-q^2) Σ_{j>i} (w_k^j)* w_l^j = q w_l^i (w_k^i)*   (k != l)
    c7: w_k^i (w_k^j)* + (1-q^2) Σ_{l<k} w_l^i (w_l^j)* = q (w_k^j)* w_k^i   (i != j)
    c8: (w_k^i)* w_k^i + (1-q^2) Σ_{j>i} (w_k^j)* w_k^j
        = w_k^i (w_k^i)* + (1-q^2) Σ_{l<k} w_l^i (w_l^i)*
    c9: Σ_k w_k^i (w_k^j)* = δ_{ij}

Classification runs an extraction tower: level i works on the ground
space of the previous level, rescales row n-i+1 over the surviving
columns F_i (sign/power prefactors (-1)^g / q^g with g counting
removed columns below), obtains an odd-sphere tuple, reads off its
rank ℓ_i and angle t_i, removes the column at the rank position, and
restricts to the new ground space.  The recovered data determine
a_i = n + 2 - i - ℓ_i and the torus angles; the representation is
irreducible exactly when the final space is one-dimensional.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    InconsistentRepresentationError,
    SpectrumViolationError,
    TruncationError,
)
from .fock import (
    FactorShape,
    TruncOp,
    Window,
    chain_basis,
    compress,
    identity,
    raise_q,
    scalar_factor,
    tensor,
    weight_qn,
    windowed_max,
    zero,
)
from .qgroup import full_rep, weyl_word
from .sphere import (
    EigenBasis,
    OpTuple,
    RelationInstance,
    RelationReport,
    SpectrumReport,
    _eigenvalues_of,
    _instance,
    angle_of,
    check_sphere_relations,
    omega_of,
    omega_spectrum,
    rank_of,
    truncation_floor,
    unit_eigenspace,
)

__all__ = [
    "StiefelParams",
    "StiefelGenerators",
    "TowerLevel",
    "Tower",
    "Classification",
    "KernelBound",
    "VanishingReport",
    "rank_sequence",
    "predicted_columns",
    "build_generators",
    "row_sphere_tuple",
    "check_relations",
    "extract_tower",
    "closed_form_level",
    "verify_closed_form",
    "check_vanishing",
    "classify",
]


@dataclass(frozen=True)
class StiefelParams:
    """Parameters (n, m, q, a, t) of a built representation."""

    n: int
    m: int
    q: float
    a: tuple[int, ...]
    t: tuple[complex, ...]

    def __post_init__(self):
        n, m = int(self.n), int(self.m)
        if n < 2:
            raise ValueError(f"n must be >= 2, got {n}")
        if not 1 <= m <= n - 1:
            raise ValueError(f"m must be in 1..{n - 1}, got {m}")
        qv = float(self.q)
        if not 0.0 < qv < 1.0:
            raise ValueError(f"q must satisfy 0 < q < 1, got {self.q!r}")
        a = tuple(int(x) for x in self.a)
        if len(a) != m:
            raise ValueError(f"tuple a must have length {m}, got {len(a)}")
        for j, aj in enumerate(a, start=1):
            if not 1 <= aj <= n - j + 1:
                raise ValueError(f"a_{j} must lie in 1..{n - j + 1}, got {aj}")
        t = tuple(complex(z) for z in self.t)
        if len(t) != m:
            raise ValueError(f"angle vector must have length {m}, got {len(t)}")
        for j, z in enumerate(t, start=1):
            if abs(abs(z) - 1.0) > 1e-12:
                raise ValueError(f"t_{j} is not unimodular: |{z}| = {abs(z)}")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "q", qv)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "t", t)


def rank_sequence(n: int, m: int, a: Sequence[int]) -> tuple[int, ...]:
    """Level ranks ℓ_i = n + 2 - i - a_i."""
    return tuple(n + 2 - i - int(a[i - 1]) for i in range(1, m + 1))


def predicted_columns(n: int, m: int, a: Sequence[int]) -> tuple[int, ...]:
    """Columns removed by the tower: c_i is the ℓ_i-th largest survivor."""
    ranks = rank_sequence(n, m, a)
    left = set(range(1, n + 1))
    out = []
    for i in range(1, m + 1):
        ordered = sorted(left, reverse=True)
        c = ordered[ranks[i - 1] - 1]
        out.append(c)
        left.remove(c)
    return tuple(out)


@dataclass
class StiefelGenerators:
    """Rows n-m+1..n of a generator grid, zeros materialized.

    rows[i] lists w_1^i .. w_n^i; meta carries the build parameters
    when they are known (bundle files may omit them).
    """

    n: int
    m: int
    q: float
    shape: FactorShape
    rows: dict[int, list[TruncOp]]
    meta: StiefelParams | None = None

    def __post_init__(self):
        expect = set(range(self.n - self.m + 1, self.n + 1))
        if set(self.rows) != expect:
            raise ValueError(f"rows {sorted(self.rows)} do not match {sorted(expect)}")
        for i, ops in self.rows.items():
            if len(ops) != self.n:
                raise ValueError(f"row {i} has {len(ops)} entries, expected {self.n}")
            for k, op in enumerate(ops, start=1):
                if op.shape.dims != self.shape.dims:
                    raise ValueError(f"entry ({i}, {k}) shape mismatch")

    def w(self, i: int, k: int) -> TruncOp:
        """w_k^i: row i (1-based from the top of the full grid), column k."""
        return self.rows[i][k - 1]


def build_generators(params: StiefelParams, cutoff: int) -> StiefelGenerators:
    """Build the last m grid rows of the representation indexed by (a, t)."""
    rep = full_rep(params.t, params.a, params.n, params.q, cutoff)
    n, m = params.n, params.m
    rows = {
        i: [rep.materialize(i, k) for k in range(1, n + 1)]
        for i in range(n - m + 1, n + 1)
    }
    return StiefelGenerators(n, m, params.q, rep.shape, rows, meta=params)


def row_sphere_tuple(gens: StiefelGenerators) -> OpTuple:
    """The bottom row read backwards: T_k = w_{n-k+1}^n.

    For m = 1 this tuple satisfies the odd-sphere relations, and the
    nine families collapse onto the four sphere families.
    """
    n = gens.n
    ops = tuple(gens.w(n, n - k + 1) for k in range(1, n + 1))
    return OpTuple(ops, gens.q)


def check_relations(
    gens: StiefelGenerators, window: Window | None = None, tol: float = 1e-10
) -> RelationReport:
    """Windowed residuals of the nine defining families."""
    window = window if window is not None else Window()
    n, m, q = gens.n, gens.m, gens.q
    R = list(range(n - m + 1, n + 1))
    w = gens.w
    one = identity(gens.shape)
    nul = zero(gens.shape)
    inst: list[RelationInstance] = []

    for k in range(1, n + 1):
        for ii, i in enumerate(R):
            for j in R[ii + 1 :]:
                inst.append(
                    _instance(
                        f"c1[i={i},j={j},k={k}]",
                        w(i, k) @ w(j, k),
                        q * (w(j, k) @ w(i, k)),
                        window,
                    )
                )
    for i in R:
        for k in range(1, n + 1):
            for l in range(k + 1, n + 1):
                inst.append(
                    _instance(
                        f"c2[i={i},k={k},l={l}]",
                        w(i, k) @ w(i, l),
                        q * (w(i, l) @ w(i, k)),
                        window,
                    )
                )
    for ii, i in enumerate(R):
        for j in R[ii + 1 :]:
            for k in range(1, n + 1):
                for l in range(1, k):
                    inst.append(
                        _instance(
                            f"c3[i={i},j={j},k={k},l={l}]",
                            w(i, k) @ w(j, l),
                            w(j, l) @ w(i, k),
                            window,
                        )
                    )
    for i in R:
        for j in R:
            if not i > j:
                continue
            for k in range(1, n + 1):
                for l in range(1, k):
                    inst.append(
                        _instance(
                            f"c4[i={i},j={j},k={k},l={l}]",
                            w(i, k) @ w(j, l),
                            w(j, l) @ w(i, k) + (1.0 / q - q) * (w(i, l) @ w(j, k)),
                            window,
                        )
                    )
    for i in R:
        for j in R:
            if i == j:
                continue
            for k in range(1, n + 1):
                for l in range(1, n + 1):
                    if k == l:
                        continue
                    inst.append(
                        _instance(
                            f"c5[i={i},j={j},k={k},l={l}]",
                            w(i, k).adjoint() @ w(j, l),
                            w(j, l) @ w(i, k).adjoint(),
                            window,
                        )
                    )
    for i in R:
        for k in range(1, n + 1):
            for l in range(1, n + 1):
                if k == l:
                    continue
                lhs = w(i, k).adjoint() @ w(i, l)
                for j in R:
                    if j > i:
                        lhs = lhs + (1.0 - q**2) * (w(j, k).adjoint() @ w(j, l))
                inst.append(
                    _instance(
                        f"c6[i={i},k={k},l={l}]",
                        lhs,
                        q * (w(i, l) @ w(i, k).adjoint()),
                        window,
                    )
                )
    for i in R:
        for j in R:
            if i == j:
                continue
            for k in range(1, n + 1):
                lhs = w(i, k) @ w(j, k).adjoint()
                for l in range(1, k):
                    lhs = lhs + (1.0 - q**2) * (w(i, l) @ w(j, l).adjoint())
                inst.append(
                    _instance(
                        f"c7[i={i},j={j},k={k}]",
                        lhs,
                        q * (w(j, k).adjoint() @ w(i, k)),
                        window,
                    )
                )
    for i in R:
        for k in range(1, n + 1):
            lhs = w(i, k).adjoint() @ w(i, k)
            for j in R:
                if j > i:
                    lhs = lhs + (1.0 - q**2) * (w(j, k).adjoint() @ w(j, k))
            rhs = w(i, k) @ w(i, k).adjoint()
            for l in range(1, k):
                rhs = rhs + (1.0 - q**2) * (w(i, l) @ w(i, l).adjoint())
            inst.append(_instance(f"c8[i={i},k={k}]", lhs, rhs, window))
    for i in R:
        for j in R:
            acc = nul
            for k in range(1, n + 1):
                acc = acc + w(i, k) @ w(j, k).adjoint()
            inst.append(
                _instance(f"c9[i={i},j={j}]", acc, one if i == j else nul, window)
            )
    return RelationReport(inst, window.margin, tol)


@dataclass
class TowerLevel:
    """One extraction step: level i works on row n-i+1."""

    level: int
    row: int
    rank: int
    column: int
    angle: complex
    columns: tuple[int, ...]
    signs: tuple[int, ...]
    ops: OpTuple
    basis: EigenBasis
    ambient_basis: object  # ambient x dim matrix for this level's space; None at level 1
    sphere_report: RelationReport | None
    spectrum: SpectrumReport


@dataclass
class Tower:
    """Full extraction run with the recovered classification data."""

    levels: list[TowerLevel]
    final_dim: int
    final_basis: object
    a: tuple[int, ...]
    t: tuple[complex, ...]

    @property
    def irreducible(self) -> bool:
        return self.final_dim == 1


def _restricted(op: TruncOp, basis, shape: FactorShape) -> TruncOp:
    if basis is None:
        return op
    return compress(op, basis, shape)


def extract_tower(
    gens: StiefelGenerators,
    window: Window | None = None,
    tol_rel: float = 1e-10,
    tol_eig: float = 1e-8,
    tol_zero: float = 1e-8,
    verify_levels: bool = True,
) -> Tower:
    """Run the extraction tower and recover (a, t).

    Each level checks the sphere relations and the spectral law before
    trusting the recovered rank and angle; a failed check raises
    InconsistentRepresentationError (or SpectrumViolationError), and a
    ground state destroyed by the cutoff raises TruncationError.
    """
    window = window if window is not None else Window()
    n, m, q = gens.n, gens.m, gens.q
    removed: list[int] = []
    levels: list[TowerLevel] = []
    chain = None
    shape = gens.shape
    for i in range(1, m + 1):
        row = n - i + 1
        cols = tuple(sorted(set(range(1, n + 1)) - set(removed), reverse=True))
        signs = tuple(sum(1 for c in removed if c < f) for f in cols)
        ops = []
        for f, g in zip(cols, signs):
            scale = (-1.0) ** g / q**g
            ops.append(scale * _restricted(gens.w(row, f), chain, shape))
        tup = OpTuple(tuple(ops), q)
        report = None
        if verify_levels:
            report = check_sphere_relations(tup, window, tol_rel)
            if not report.passed():
                worst = report.worst
                raise InconsistentRepresentationError(
                    f"level {i}: sphere relations fail at {worst.name} "
                    f"(residual {worst.in_window:.3e}, tol {tol_rel})"
                )
        ell = rank_of(tup, window, tol_zero)
        spectrum = omega_spectrum(tup, ell, tol_eig, strict=True)
        try:
            basis = unit_eigenspace(omega_of(tup, ell), tol_eig)
        except SpectrumViolationError as exc:
            raise TruncationError(
                f"level {i}: ground space lost at this cutoff ({exc})"
            ) from exc
        angle = angle_of(tup, ell, basis=basis, tol=tol_eig)
        column = cols[ell - 1]
        ambient = chain
        chain = basis.matrix if chain is None else chain_basis(chain, basis.matrix)
        levels.append(
            TowerLevel(
                level=i,
                row=row,
                rank=ell,
                column=column,
                angle=angle,
                columns=cols,
                signs=signs,
                ops=tup,
                basis=basis,
                ambient_basis=ambient,
                sphere_report=report,
                spectrum=spectrum,
            )
        )
        removed.append(column)
        shape = basis.shape
    a = tuple(n + 2 - lv.level - lv.rank for lv in levels)
    t = tuple(lv.angle for lv in levels)
    final_dim = levels[-1].basis.dim
    return Tower(levels, final_dim, chain, a, t)


@dataclass
class Classification:
    """Recovered (a, t) with the supporting tower."""

    a: tuple[int, ...]
    t: tuple[complex, ...]
    multiplicity: int
    tower: Tower

    @property
    def irreducible(self) -> bool:
        return self.multiplicity == 1


def classify(
    gens: StiefelGenerators,
    window: Window | None = None,
    tol_rel: float = 1e-10,
    tol_eig: float = 1e-8,
    verify_levels: bool = True,
) -> Classification:
    """Classify a representation by its extraction tower."""
    tower = extract_tower(
        gens, window, tol_rel=tol_rel, tol_eig=tol_eig, verify_levels=verify_levels
    )
    return Classification(tower.a, tower.t, tower.final_dim, tower)


def closed_form_level(
    n: int,
    m: int,
    a: Sequence[int],
    t: Sequence[complex],
    level: int,
    shape: FactorShape,
    q: float,
) -> list[TruncOp]:
    """The level tuple in closed form on a given factor shape.

    Live factors split into a leading identity block (one factor per
    deeper active letter) and ℓ-1 trailing active factors:

        T_l = t_i (q^N)^⊗(l-1) ⊗ sqrt(1-q^(2N)) S* ⊗ 1 ⊗ ...   l < ℓ
        T_ℓ = t_i (q^N)^⊗(ℓ-1),  zero above the rank,

    all scaled into place on the trailing live slots.
    """
    ranks = rank_sequence(n, m, a)
    if not 1 <= level <= m:
        raise ValueError(f"level must be in 1..{m}, got {level}")
    ell = ranks[level - 1]
    pre = sum(r - 1 for r in ranks[level:])
    live = [j for j, d in enumerate(shape.dims) if d > 1]
    if len(live) != pre + ell - 1:
        raise ValueError(
            f"shape has {len(live)} live factors, level {level} needs {pre + ell - 1}"
        )
    dims_live = [shape.dims[j] for j in live]
    scalar = complex(t[level - 1])
    out: list[TruncOp] = []
    for l in range(1, n - level + 2):
        if l > ell:
            out.append(zero(shape))
            continue
        if l == ell:
            active = [weight_qn(q, d) for d in dims_live[pre:]]
        else:
            active = []
            for pos, d in enumerate(dims_live[pre:], start=1):
                if pos < l:
                    active.append(weight_qn(q, d))
                elif pos == l:
                    active.append(raise_q(q, d))
                else:
                    active.append(identity(FactorShape((d,))))
        pieces: list[TruncOp] = []
        live_iter = iter([identity(FactorShape((d,))) for d in dims_live[:pre]] + active)
        for d in shape.dims:
            if d == 1:
                pieces.append(scalar_factor(1.0))
            else:
                pieces.append(next(live_iter))
        out.append(scalar * tensor(pieces))
    return out


def verify_closed_form(
    tower: Tower,
    params: StiefelParams,
    window: Window | None = None,
    tol: float = 1e-10,
) -> RelationReport:
    """Windowed comparison of every tower level against its closed form."""
    window = window if window is not None else Window()
    inst: list[RelationInstance] = []
    for lv in tower.levels:
        shape = lv.ops.shape
        forms = closed_form_level(
            params.n, params.m, params.a, params.t, lv.level, shape, params.q
        )
        for l, (got, want) in enumerate(zip(lv.ops.ops, forms), start=1):
            inst.append(
                _instance(f"closed[level={lv.level},comp={l}]", got, want, window)
            )
    return RelationReport(inst, window.margin, tol)


@dataclass(frozen=True)
class KernelBound:
    """Smallest singular value of the rank generator above the floor."""

    level: int
    sigma_min: float
    bound: float

    @property
    def ok(self) -> bool:
        return self.sigma_min >= self.bound


@dataclass
class VanishingReport:
    """Vanishing identities plus kernel bounds along the tower."""

    zeros: RelationReport
    kernel: list[KernelBound]

    def passed(self) -> bool:
        return self.zeros.passed() and all(kb.ok for kb in self.kernel)


def check_vanishing(
    gens: StiefelGenerators,
    tower: Tower,
    window: Window | None = None,
    tol: float = 1e-9,
) -> VanishingReport:
    """Check the structural zeros and injectivity along the tower.

    On the level-j space: generators at previously removed columns
    vanish, and so do the generators below the removed column of the
    level.  The rank generator stays injective away from the cut: its
    smallest singular value above the truncation floor is at least q^D.
    """
    window = window if window is not None else Window()
    n = gens.n
    inst: list[RelationInstance] = []
    kernel: list[KernelBound] = []
    removed: list[int] = []
    for lv in tower.levels:
        shape = lv.ops.shape
        for c in removed:
            op = _restricted(gens.w(lv.row, c), lv.ambient_basis, shape)
            inst.append(
                RelationInstance(
                    f"vanish_removed[level={lv.level},col={c}]",
                    windowed_max(op, window),
                    op.max_abs(),
                )
            )
        for pos, f in enumerate(lv.columns, start=1):
            if pos <= lv.rank:
                continue
            op = lv.ops.op(pos)
            inst.append(
                RelationInstance(
                    f"vanish_low[level={lv.level},col={f}]",
                    windowed_max(op, window),
                    op.max_abs(),
                )
            )
        live = [d for d in shape.dims if d > 1]
        dmax = max(live) if live else 2
        floor = truncation_floor(shape, gens.q)
        vals = _eigenvalues_of(omega_of(lv.ops, lv.rank))
        above = vals[vals >= floor - 1e-12]
        sigma = float(np.sqrt(max(above.min(), 0.0))) if above.size else 0.0
        kernel.append(KernelBound(lv.level, sigma, gens.q**dmax))
        removed.append(lv.column)
    return VanishingReport(RelationReport(inst, window.margin, tol), kernel)
