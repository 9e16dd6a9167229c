"""Acceptance suite: one test per criterion, pinned tolerances.

Shared grid: n in 2..4, every m <= n-1 (capped at 2), every admissible
index tuple, q in {0.4, 0.6}, cutoff 12, margin 2.  Torus angles are
odd eighth roots of unity, (2i-1)/8 turns at level i, so round trips
are checked away from the trivial angle.
"""

import numpy as np
import pytest

from qstiefel.errors import NotIsomorphicError
from qstiefel.fock import Window
from qstiefel.qgroup import admissible_tuples, full_rep, path_evaluate, weyl_word
from qstiefel.report import phase_to_turns, turns_distance, turns_to_phase
from qstiefel.sphere import (
    build_intertwiner,
    check_power_identity,
    check_sphere_relations,
    model_tuple,
    omega_spectrum,
    rank_of,
)
from qstiefel.stiefel import (
    StiefelParams,
    build_generators,
    check_relations,
    check_vanishing,
    extract_tower,
    row_sphere_tuple,
)

CUTOFF = 12
MARGIN = 2
QS = (0.4, 0.6)
TOL_REL = 1e-10
TOL_EIG = 1e-8
TOL_PATH = 1e-13
TOL_VANISH = 1e-9
TOL_INTERTWINE = 1e-9
TOL_REDUCE = 1e-12
TOL_TURNS = 1e-8


def _turns(m):
    return tuple((2 * i - 1) / 8 for i in range(1, m + 1))


def _angles(m):
    return tuple(turns_to_phase(x) for x in _turns(m))


class Corpus:
    """Lazily built and cached representations over the shared grid."""

    def __init__(self):
        self._gens = {}
        self._towers = {}

    @staticmethod
    def keys():
        for n in (2, 3, 4):
            for m in (1, 2):
                if m > n - 1:
                    continue
                for a in admissible_tuples(n, m):
                    for q in QS:
                        yield (n, m, a, q)

    @staticmethod
    def params(key):
        n, m, a, q = key
        return StiefelParams(n, m, q, a, _angles(m))

    def gens(self, key):
        if key not in self._gens:
            self._gens[key] = build_generators(self.params(key), CUTOFF)
        return self._gens[key]

    def tower(self, key):
        if key not in self._towers:
            self._towers[key] = extract_tower(self.gens(key), Window(MARGIN))
        return self._towers[key]


@pytest.fixture(scope="module")
def corpus():
    return Corpus()


def test_criterion_1_bottom_rows_satisfy_sphere_relations(corpus):
    count, worst = 0, 0.0
    for key in Corpus.keys():
        n, m, a, q = key
        if m != 1:
            continue
        tup = row_sphere_tuple(corpus.gens(key))
        rep = check_sphere_relations(tup, Window(MARGIN), TOL_REL)
        assert rep.passed(), (key, rep.worst)
        assert rank_of(tup, Window(MARGIN)) == n + 1 - a[0], key
        worst = max(worst, rep.max_residual)
        count += 1
    assert worst <= TOL_REL
    print(f"criterion 1: PASS ({count} tuples, max residual {worst:.3e})")


def test_criterion_2_omega_spectrum_obeys_the_lattice_law(corpus):
    count = 0
    for key in Corpus.keys():
        n, m, a, q = key
        if m != 1:
            continue
        tup = row_sphere_tuple(corpus.gens(key))
        rank = n + 1 - a[0]
        rep = omega_spectrum(tup, rank, TOL_EIG)
        assert rep.conforms, (key, rep.worst_off_lattice)
        seen = sorted({e for e in rep.exponents if e is not None})
        assert seen and seen[0] == 0, key
        assert seen == list(range(len(seen))), (key, seen)
        count += 1
    print(f"criterion 2: PASS ({count} spectra on the lattice, gap-free)")


def test_criterion_3_path_sums_match_the_convolved_grid():
    q, D = 0.5, 8
    checked, worst = 0, 0.0
    for n in (2, 3, 4):
        for m in range(1, n):
            t = _angles(m)
            for a in admissible_tuples(n, m):
                word = weyl_word(a, n)
                rep = full_rep(t, a, n, q, D)
                for r in range(1, n + 1):
                    for c in range(1, n + 1):
                        via_path = path_evaluate(word, t, r, c, n, q, D)
                        diff = (via_path - rep.materialize(r, c)).max_abs()
                        worst = max(worst, diff)
                        checked += 1
    assert worst <= TOL_PATH
    print(f"criterion 3: PASS ({checked} entries, max gap {worst:.3e})")


def test_criterion_4_all_nine_relation_families_hold(corpus):
    count, worst = 0, 0.0
    for key in Corpus.keys():
        rep = check_relations(corpus.gens(key), Window(MARGIN), TOL_REL)
        assert rep.passed(), (key, rep.worst)
        worst = max(worst, rep.max_residual)
        count += 1
    assert worst <= TOL_REL
    print(f"criterion 4: PASS ({count} representations, max residual {worst:.3e})")


def test_criterion_5_tower_recovers_the_build_parameters(corpus):
    count = 0
    for key in Corpus.keys():
        n, m, a, q = key
        tower = corpus.tower(key)
        assert tower.a == a, (key, tower.a)
        assert tower.final_dim == 1, key
        declared = _turns(m)
        for got, want in zip(tower.t, declared):
            assert turns_distance(phase_to_turns(got), want) <= TOL_TURNS, key
        count += 1
    print(f"criterion 5: PASS ({count} round trips, a exact, t within {TOL_TURNS})")


def test_criterion_6_intertwiners_exist_exactly_for_matching_angles(corpus):
    count, worst = 0, 0.0
    other = turns_to_phase(5 / 8)
    for key in Corpus.keys():
        n, m, a, q = key
        if (n, m) != (3, 1):
            continue
        tup = row_sphere_tuple(corpus.gens(key))
        rank = n + 1 - a[0]
        same = model_tuple(n, rank, _angles(1)[0], q, CUTOFF)
        iw = build_intertwiner(tup, same, max_total=6)
        assert iw.residual <= TOL_INTERTWINE, (key, iw.residual)
        worst = max(worst, iw.residual)
        with pytest.raises(NotIsomorphicError):
            build_intertwiner(tup, model_tuple(n, rank, other, q, CUTOFF), max_total=6)
        count += 1
    print(f"criterion 6: PASS ({count} pairs, max residual {worst:.3e})")


def test_criterion_7_power_identity_up_to_third_powers():
    worst = 0.0
    for q in QS:
        tup = model_tuple(3, 3, _angles(1)[0], q, 16)
        for i in (1, 2, 3):
            for m in (1, 2, 3):
                rep = check_power_identity(tup, i, m, Window(4), TOL_REL)
                assert rep, (q, i, m, rep.max_in_window)
                worst = max(worst, rep.max_in_window)
    assert worst <= TOL_REL
    print(f"criterion 7: PASS (powers 1..3, max residual {worst:.3e})")


def test_criterion_8_removed_columns_vanish_with_kernel_bounds(corpus):
    count, bounds = 0, 0
    for key in Corpus.keys():
        vr = check_vanishing(corpus.gens(key), corpus.tower(key), Window(MARGIN), TOL_VANISH)
        assert vr.passed(), (key, vr.zeros.worst)
        for kb in vr.kernel:
            assert kb.ok, (key, kb.level, kb.sigma_min, kb.bound)
            bounds += 1
        count += 1
    print(f"criterion 8: PASS ({count} towers, {bounds} kernel bounds)")


def test_criterion_9_single_row_case_reduces_to_the_sphere_engine(corpus):
    pairs, worst = 0, 0.0
    for key in Corpus.keys():
        n, m, a, q = key
        if m != 1:
            continue
        gens = corpus.gens(key)
        crel = check_relations(gens, Window(MARGIN), TOL_REL).by_name()
        srel = check_sphere_relations(
            row_sphere_tuple(gens), Window(MARGIN), TOL_REL
        ).by_name()
        mapping = []
        for k in range(1, n + 1):
            for l in range(k + 1, n + 1):
                mapping.append(
                    (f"c2[i={n},k={k},l={l}]", f"swap[i={n - k + 1},j={n - l + 1}]")
                )
        for k in range(1, n + 1):
            for l in range(1, n + 1):
                if k != l:
                    mapping.append(
                        (
                            f"c6[i={n},k={k},l={l}]",
                            f"adjoint_swap[i={n - k + 1},j={n - l + 1}]",
                        )
                    )
        for k in range(1, n + 1):
            mapping.append((f"c8[i={n},k={k}]", f"defect[i={n - k + 1}]"))
        mapping.append((f"c9[i={n},j={n}]", "sphere_sum"))
        for cname, sname in mapping:
            gap = abs(crel[cname].in_window - srel[sname].in_window)
            worst = max(worst, gap)
            pairs += 1
    assert worst <= TOL_REDUCE
    print(f"criterion 9: PASS ({pairs} residual pairs, max disagreement {worst:.3e})")
