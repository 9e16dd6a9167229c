"""Generator grids: elementary/torus pieces, words, convolution, paths."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qstiefel.fock import Window, identity, weight_qn, window_equal
from qstiefel.qgroup import (
    admissible_tuples,
    convolve,
    counit_rep,
    elementary_rep,
    full_rep,
    path_evaluate,
    torus_rep,
    weyl_word,
    word_rep,
)
from qstiefel.report import turns_to_phase

Q, D = 0.5, 8


def test_elementary_grid_entries():
    g = elementary_rep(1, 3, Q, D)
    assert g.shape.dims == (D,)
    assert set(g.entries) == {(1, 1), (2, 2), (1, 2), (2, 1), (3, 3)}
    np.testing.assert_allclose(
        np.diag(g.entries[(2, 1)].dense()), [Q**k for k in range(D)]
    )
    np.testing.assert_allclose(
        np.diag(g.entries[(1, 2)].dense()), [-(Q ** (k + 1)) for k in range(D)]
    )
    # untouched diagonal rows carry the identity
    np.testing.assert_allclose(g.entries[(3, 3)].dense(), np.eye(D))


def test_elementary_rows_are_coisometric_on_window():
    # Σ_l π(u_l^k) π(u_l^k)* = 1 away from the cut
    g = elementary_rep(2, 4, Q, D)
    one = identity(g.shape)
    for k in range(1, 5):
        acc = None
        for l in range(1, 5):
            op = g.op(k, l)
            if op is None:
                continue
            term = op @ op.adjoint()
            acc = term if acc is None else acc + term
        assert window_equal(acc, one, Window(1), 1e-12)


def test_torus_grid_scalars():
    t = (np.exp(0.4j), np.exp(1.1j))
    g = torus_rep(t, 3)
    assert g.shape.dims == (1,)
    assert g.entries[(3, 3)].dense()[0, 0] == pytest.approx(t[0])
    assert g.entries[(2, 2)].dense()[0, 0] == pytest.approx(t[1])
    assert g.entries[(1, 1)].dense()[0, 0] == pytest.approx(np.conj(t[0] * t[1]))
    assert (1, 2) not in g.entries


def test_torus_rejects_non_unimodular():
    with pytest.raises(ValueError):
        torus_rep((0.9, 1.0), 3)


def test_counit_is_identity_grid():
    g = counit_rep(4)
    assert set(g.entries) == {(k, k) for k in range(1, 5)}
    assert g.entries[(2, 2)].dense()[0, 0] == 1.0


def test_weyl_word_frozen_examples():
    assert weyl_word((1,), 3) == [2, 1]
    assert weyl_word((3, 2), 6) == [4, 3, 2, 5, 4, 3]
    # each block j is empty exactly when a_j = n - j + 1
    assert weyl_word((3,), 3) == []
    # a = (2, 2): the j = 2 block is empty, the j = 1 block is n-1 .. a_1
    assert weyl_word((2, 2), 3) == [2]


def test_weyl_word_validates_tuple():
    with pytest.raises(ValueError):
        weyl_word((4,), 3)
    with pytest.raises(ValueError):
        weyl_word((0,), 3)
    with pytest.raises(ValueError):
        weyl_word((1, 1, 1), 3)


def test_admissible_tuples_order_and_count():
    got = admissible_tuples(3, 2)
    assert got == [(1, 1), (1, 2), (2, 1), (2, 2), (3, 1), (3, 2)]
    assert len(admissible_tuples(4, 2)) == 12
    assert len(admissible_tuples(4, 3)) == 24


@settings(deadline=None, max_examples=30)
@given(n=st.integers(min_value=2, max_value=6), data=st.data())
def test_admissible_count_formula(n, data):
    m = data.draw(st.integers(min_value=1, max_value=n - 1))
    expect = 1
    for j in range(1, m + 1):
        expect *= n - j + 1
    assert len(admissible_tuples(n, m)) == expect


def test_convolve_concatenates_factors():
    a = elementary_rep(1, 3, Q, D)
    b = elementary_rep(2, 3, Q, D)
    g = convolve(a, b)
    assert g.shape.dims == (D, D)
    # the (1, 3) entry has a single route: stay-then-hop times hop
    want = np.kron(a.entries[(1, 2)].dense(), b.entries[(2, 3)].dense())
    np.testing.assert_allclose(g.entries[(1, 3)].dense(), want)


def test_word_rep_frozen_corner_entry():
    g = word_rep([2, 1], 3, Q, D)
    assert g.shape.dims == (D, D)
    qn = weight_qn(Q, D).dense()
    np.testing.assert_allclose(g.materialize(3, 1).dense(), np.kron(qn, qn))


def test_word_rep_empty_word_is_counit():
    g = word_rep([], 3, Q, D)
    assert g.shape.dims == (1,)
    assert set(g.entries) == {(k, k) for k in range(1, 4)}


def test_full_rep_smallest_case():
    t1 = turns_to_phase(0.3)
    g = full_rep((t1,), (1,), 2, Q, D)
    assert g.shape.dims == (1, D)
    got = g.materialize(2, 2).dense()
    up = np.zeros((D, D), complex)
    for k in range(D - 1):
        up[k + 1, k] = np.sqrt(1 - Q ** (2 * k + 2))
    np.testing.assert_allclose(got, t1 * np.kron([[1]], up))
    np.testing.assert_allclose(
        np.diag(g.materialize(2, 1).dense()), t1 * Q ** np.arange(D)
    )


def test_full_rep_empty_word_is_diagonal():
    g = full_rep((turns_to_phase(0.25),), (2,), 2, Q, D)
    assert g.shape.dims == (1,)
    assert g.materialize(1, 2).max_abs() == 0.0
    assert abs(g.materialize(2, 2).dense()[0, 0] - turns_to_phase(0.25)) < 1e-15


def test_full_rep_angle_count_must_match():
    with pytest.raises(ValueError):
        full_rep((1.0, 1.0), (1,), 3, Q, D)


def test_path_evaluate_agrees_with_convolution():
    t = (turns_to_phase(0.2), turns_to_phase(0.45))
    a = (1, 2)
    word = weyl_word(a, 3)
    rep = full_rep(t, a, 3, Q, D)
    for r in range(1, 4):
        for c in range(1, 4):
            pe = path_evaluate(word, t, r, c, 3, Q, D)
            assert (rep.materialize(r, c) - pe).max_abs() < 1e-14


def test_path_evaluate_structural_zero():
    word = weyl_word((1,), 3)
    pe = path_evaluate(word, (1.0,), 1, 3, 3, Q, D)
    # no route from row 1 to column 3 through letters [2, 1]
    assert pe.max_abs() == 0.0
    assert pe.shape.dims == (1, D, D)
