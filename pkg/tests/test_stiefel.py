"""Grid rows, the nine relation families, and the extraction tower."""

import numpy as np
import pytest

from qstiefel.errors import ClassificationError
from qstiefel.fock import Window, windowed_max
from qstiefel.report import phase_to_turns, turns_distance, turns_to_phase
from qstiefel.sphere import check_sphere_relations
from qstiefel.stiefel import (
    StiefelGenerators,
    StiefelParams,
    build_generators,
    check_relations,
    check_vanishing,
    classify,
    extract_tower,
    predicted_columns,
    rank_sequence,
    row_sphere_tuple,
    verify_closed_form,
)

Q = 0.5
T2 = (turns_to_phase(0.3), turns_to_phase(0.15))


def _build(n, m, a, t, D):
    return build_generators(StiefelParams(n, m, Q, a, t), D)


def test_rank_and_column_bookkeeping():
    assert rank_sequence(6, 2, (3, 2)) == (4, 4)
    assert predicted_columns(6, 2, (3, 2)) == (3, 2)
    assert rank_sequence(3, 1, (2,)) == (2,)
    assert predicted_columns(3, 1, (2,)) == (2,)
    # level 1 always removes column a_1
    for a1 in (1, 2, 3, 4):
        assert predicted_columns(4, 1, (a1,))[0] == a1


def test_params_validation():
    with pytest.raises(ValueError):
        StiefelParams(3, 3, Q, (1, 1, 1), (1.0, 1.0, 1.0))
    with pytest.raises(ValueError):
        StiefelParams(3, 2, Q, (4, 1), T2)
    with pytest.raises(ValueError):
        StiefelParams(3, 2, Q, (1, 1), (1.0,))
    with pytest.raises(ValueError):
        StiefelParams(3, 2, Q, (1, 1), (0.5, 1.0))
    with pytest.raises(ValueError):
        StiefelParams(3, 2, 1.2, (1, 1), T2)


def test_build_shapes_and_meta():
    params = StiefelParams(3, 1, Q, (1,), (turns_to_phase(0.3),))
    gens = build_generators(params, 8)
    assert gens.meta is params
    assert set(gens.rows) == {3}
    assert len(gens.rows[3]) == 3
    # word for a = (1,) has two letters, plus the scalar torus leg
    assert gens.shape.dims == (1, 8, 8)


def test_row_sphere_tuple_reads_backwards():
    gens = _build(3, 1, (1,), (turns_to_phase(0.3),), 8)
    tup = row_sphere_tuple(gens)
    assert tup.n == 3
    for k in range(1, 4):
        assert (tup.op(k).mat != gens.w(3, 4 - k).mat).nnz == 0
    rep = check_sphere_relations(tup, Window(2), 1e-10)
    assert rep.passed(), rep.worst


def test_relations_hold_on_a_genuine_representation():
    gens = _build(3, 2, (1, 1), T2, 10)
    rep = check_relations(gens, Window(2), 1e-10)
    assert rep.passed(), rep.worst
    assert rep.max_residual < 1e-12
    assert set(rep.families()) == {f"c{i}" for i in range(1, 10)}


def test_mixed_relation_star_goes_on_the_second_row_index():
    # with the star on the other factor the mixed relation is false:
    # the residual is macroscopic on a representation that satisfies
    # every family as implemented.
    gens = _build(3, 2, (1, 1), T2, 10)
    assert check_relations(gens, Window(2), 1e-10).passed()
    q, n = gens.q, gens.n
    window = Window(2)
    alt_max = 0.0
    for i in (2, 3):
        for j in (2, 3):
            if i == j:
                continue
            for k in range(1, n + 1):
                lhs = gens.w(i, k) @ gens.w(j, k).adjoint()
                for l in range(1, k):
                    lhs = lhs + (1.0 - q**2) * (gens.w(i, l) @ gens.w(j, l).adjoint())
                alt = q * (gens.w(i, k).adjoint() @ gens.w(j, k))
                alt_max = max(alt_max, windowed_max(lhs - alt, window))
    assert alt_max > 0.1


def test_tower_recovers_every_index_pair():
    expected = {
        (1, 1): ([3, 2], [1, 2]),
        (1, 2): ([3, 1], [1, 3]),
        (2, 1): ([2, 2], [2, 1]),
        (2, 2): ([2, 1], [2, 3]),
        (3, 1): ([1, 2], [3, 1]),
        (3, 2): ([1, 1], [3, 2]),
    }
    for a, (ranks, cols) in expected.items():
        gens = _build(3, 2, a, T2, 10)
        cls = classify(gens)
        assert cls.a == a
        assert cls.multiplicity == 1
        assert cls.irreducible
        tower = cls.tower
        assert [lv.rank for lv in tower.levels] == ranks
        assert [lv.column for lv in tower.levels] == cols
        assert tuple(ranks) == rank_sequence(3, 2, a)
        assert tuple(cols) == predicted_columns(3, 2, a)
        assert tower.final_dim == 1
        for got, want in zip(cls.t, (0.3, 0.15)):
            assert turns_distance(phase_to_turns(got), want) < 1e-10


def test_tower_levels_walk_rows_bottom_up():
    gens = _build(3, 2, (2, 1), T2, 10)
    tower = extract_tower(gens)
    assert [lv.level for lv in tower.levels] == [1, 2]
    assert [lv.row for lv in tower.levels] == [3, 2]
    for lv in tower.levels:
        assert lv.sphere_report is not None and lv.sphere_report.passed()
        assert lv.spectrum.conforms


def test_closed_form_matches_extracted_levels():
    params = StiefelParams(3, 2, Q, (2, 1), T2)
    gens = build_generators(params, 10)
    tower = extract_tower(gens)
    rep = verify_closed_form(tower, params)
    assert rep.passed(), rep.worst
    assert rep.max_residual < 1e-10


def test_vanishing_and_kernel_bounds():
    params = StiefelParams(3, 2, Q, (2, 1), T2)
    gens = build_generators(params, 10)
    tower = extract_tower(gens)
    vr = check_vanishing(gens, tower)
    assert vr.passed()
    assert vr.zeros.passed()
    assert vr.kernel
    for kb in vr.kernel:
        assert kb.ok, (kb.level, kb.sigma_min, kb.bound)


def test_doctored_generators_are_rejected():
    gens = _build(3, 2, (1, 1), T2, 10)
    rows = {i: list(ops) for i, ops in gens.rows.items()}
    rows[3][1] = rows[3][1] * 1.01
    bad = StiefelGenerators(gens.n, gens.m, gens.q, gens.shape, rows)
    assert not check_relations(bad, Window(2), 1e-10).passed()
    with pytest.raises(ClassificationError):
        extract_tower(bad)


def test_angle_moves_with_the_torus_parameter():
    t_alt = (turns_to_phase(0.7), turns_to_phase(0.15))
    gens = _build(3, 2, (1, 1), t_alt, 10)
    cls = classify(gens)
    assert turns_distance(phase_to_turns(cls.t[0]), 0.7) < 1e-10
    assert turns_distance(phase_to_turns(cls.t[1]), 0.15) < 1e-10
