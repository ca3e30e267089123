import itertools
import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import substitute
from quonlab.algebra import Generator
from quonlab.fock import FockSpace
from quonlab.number_ops import (
    SeriesStateError,
    apply_direct_N,
    build_Y,
    check_transition_relations,
    check_y_dagger_commutators,
    check_pair_commutators,
    check_su2jp1_closure,
    check_series,
    direct_N,
    pair_sum,
    series_N,
    series_residual,
    solve_series_coefficients,
    verify_su2jp1_closure,
    verify_transition_relations,
    verify_Y_commutators,
    y_matrix,
)
from quonlab.scalars import EndpointError

HALF = Fraction(1, 2)

# Frozen from an exact linear solve at q = 1/2 against the direct operator,
# reproduced by an independent dict-based prototype over 2- and 3-letter words.
ORDER2_AT_HALF = {(0, 1): Fraction(320, 189), (1, 0): Fraction(-128, 189)}
ORDER3_AT_HALF = {
    (0, 1, 2): Fraction(1675264, 773955),
    (0, 2, 1): Fraction(-139264, 154791),
    (1, 0, 2): Fraction(-8192, 11907),
    (1, 2, 0): Fraction(-65536, 773955),
    (2, 0, 1): Fraction(-65536, 773955),
    (2, 1, 0): Fraction(32768, 154791),
}


# -- direct operator ----------------------------------------------------------


def test_direct_N_examples():
    space = FockSpace(2, Fraction(1, 3), 3)
    m, a, b, g = 0, 2, 0, -2
    assert apply_direct_N(space, m, m, space.basis_vector((m,))).nonzero() == {(m,): 1}
    assert apply_direct_N(space, m, m, space.basis_vector((m, m))).nonzero() == {(m, m): 2}
    assert apply_direct_N(space, a, b, space.basis_vector((b, g, b))).nonzero() == {(a, g, b): 1, (b, g, a): 1}
    assert apply_direct_N(space, a, b, space.vacuum()).nonzero() == {}


@pytest.mark.parametrize("twice_j", [1, 2, 3])
def test_direct_N_matches_substitution_oracle(twice_j):
    space = FockSpace(twice_j, HALF, 3)
    for a, b in itertools.product(space.modes, repeat=2):
        for n in range(4):
            for w in space.sector(n).words:
                assert apply_direct_N(space, a, b, space.basis_vector(w)).nonzero() == substitute(a, b, w)


def test_direct_N_is_q_independent():
    blocks = [
        [direct_N(FockSpace(2, q, 3), a, b, 3).data for a, b in itertools.product((-2, 0, 2), repeat=2)]
        for q in (-0.9, 0.0, 0.5, 0.9)
    ]
    for other in blocks[1:]:
        for x, y in zip(blocks[0], other):
            assert np.array_equal(x, y)


# -- Y operators --------------------------------------------------------------


def test_Y_base_case():
    q = HALF
    space = FockSpace(2, q, 3)
    alg = space.algebra
    y = build_Y(alg, 2, (0,))
    assert y.expansion == alg.b(2) * alg.b(0) - alg.b(0) * alg.b(2) * q
    assert y.dagger() == alg.bd(0) * alg.bd(2) - alg.bd(2) * alg.bd(0) * q


def test_Y_one_recursion_step():
    q = Fraction(2, 3)
    alg = FockSpace(2, q, 3).algebra
    k, i, i2 = 2, 0, -2
    base = alg.b(k) * alg.b(i) - alg.b(i) * alg.b(k) * q
    expected = base * alg.b(i2) - alg.b(i2) * base * q**2
    assert build_Y(alg, k, (i, i2)).expansion == expected


def test_Y_at_q0_is_plain_product():
    alg = FockSpace(2, Fraction(0), 3).algebra
    y = build_Y(alg, 2, (0, -2, 0))
    assert y.expansion == alg.b(2) * alg.b(0) * alg.b(-2) * alg.b(0)


@given(st.lists(st.sampled_from([-1, 1]), min_size=1, max_size=3), st.sampled_from([-1, 1]),
       st.fractions(min_value=-1, max_value=1, max_denominator=7))
def test_Y_has_only_annihilators(tail, head, q):
    alg = FockSpace(1, q, 1).algebra
    y = build_Y(alg, head, tuple(tail))
    for factors, _ in y.expansion.items():
        assert len(factors) == len(tail) + 1
        assert not any(g.creation for g in factors)
    assert y.order == len(tail)


def test_Y_needs_tail():
    with pytest.raises(ValueError):
        build_Y(FockSpace(1, HALF, 1).algebra, 1, ())


# -- series coefficients ------------------------------------------------------


def test_order1_coefficient_at_half():
    assert solve_series_coefficients(1, HALF).coefficient(1, (0,)) == Fraction(4, 3)


def test_order1_coefficient_at_zero():
    assert solve_series_coefficients(1, Fraction(0)).coefficient(1, (0,)) == 1


@given(st.fractions(min_value=-1, max_value=1, max_denominator=20).filter(lambda q: abs(q) != 1))
def test_order1_coefficient_closed_form(q):
    assert solve_series_coefficients(1, q).coefficient(1, (0,)) == 1 / (1 - q**2)


@pytest.mark.parametrize("q", [-0.9, -0.5, 0.0, 0.5, 0.9])
def test_order1_coefficient_float(q):
    assert solve_series_coefficients(1, q).coefficient(1, (0,)) == pytest.approx(1 / (1 - q * q), rel=1e-12)


def test_order2_golden():
    c = solve_series_coefficients(2, HALF)
    assert c.table[2] == ORDER2_AT_HALF
    assert c.table[1] == {(0,): Fraction(4, 3)}


def test_order3_golden():
    assert solve_series_coefficients(3, HALF).table[3] == ORDER3_AT_HALF


def test_float_solve_agrees_with_exact():
    exact = solve_series_coefficients(2, HALF)
    approx = solve_series_coefficients(2, 0.5)
    for e, a in zip(exact.entries(), approx.entries()):
        assert (e.order, e.permutation) == (a.order, a.permutation)
        assert a.value == pytest.approx(float(e.value), rel=1e-10)


@pytest.mark.parametrize("q", [1, -1, 1.0, -1.0])
def test_endpoints_rejected(q):
    with pytest.raises(EndpointError):
        solve_series_coefficients(1, q)


def test_series_beyond_solved_order():
    space = FockSpace(1, HALF, 3)
    c = solve_series_coefficients(1, HALF)
    with pytest.raises(SeriesStateError):
        series_N(space, 1, 1, 2, 3, c)


def test_coefficient_json_export():
    doc = json.loads(solve_series_coefficients(2, HALF).to_json())
    assert doc["coefficients"] == {"1": {"1": "4/3"}, "2": {"12": "320/189", "21": "-128/189"}}
    assert doc["backend"] == "exact"


@pytest.mark.parametrize("q", [HALF, Fraction(-3, 5), 0.7, -0.9])
@pytest.mark.parametrize("twice_j", [1, 2])
def test_series_sector_exactness(q, twice_j):
    space = FockSpace(twice_j, q, 3)
    c = solve_series_coefficients(2, q)
    for K in range(3):
        for a, b in itertools.product(space.modes, repeat=2):
            for n in range(K + 2):
                assert series_residual(space, a, b, K, n, c) <= 1e-12


def test_K0_on_one_particle_and_K1_on_two():
    space = FockSpace(2, HALF, 2)
    c = solve_series_coefficients(1, HALF)
    for a, b in itertools.product(space.modes, repeat=2):
        assert np.array_equal(series_N(space, a, b, 0, 1, c).data, direct_N(space, a, b, 1).data)
        assert np.array_equal(series_N(space, a, b, 1, 2, c).data, direct_N(space, a, b, 2).data)


def test_residual_on_sector3_decreases_with_K():
    space = FockSpace(2, HALF, 3)
    c = solve_series_coefficients(2, HALF)
    r = [max(series_residual(space, a, b, K, 3, c) for a, b in itertools.product(space.modes, repeat=2))
         for K in range(3)]
    assert r[0] > r[1] > r[2] == 0


def test_check_series_records():
    records = check_series(FockSpace(1, HALF, 3), 2)
    assert [r.name for r in records] == ["series.order1"] + ["series.exactness"] * 3
    assert all(r.passed for r in records)


# -- identity checks ----------------------------------------------------------


def test_transition_relations_examples():
    space = FockSpace(3, 0.7, 3)
    assert verify_transition_relations(space, 1, 1, 1).passed
    assert verify_transition_relations(space, 3, -1, 1).passed
    for a, b, m in [(3, -3, -3), (-1, 1, 3), (1, 1, -1)]:
        assert verify_transition_relations(space, a, b, m).residual == 0


@pytest.mark.parametrize("q", [HALF, -0.9, 0.0, 0.9])
def test_transition_relation_sweep(q):
    assert check_transition_relations(FockSpace(2, q, 3)).passed


def test_Y_commutators_distinct_indices():
    space = FockSpace(2, HALF, 3)
    six, seven = verify_Y_commutators(space, 2, 0, -2, (0,))
    assert six.passed and seven.passed and six.residual == seven.residual == 0


def test_Y_commutator_vanishes_when_beta_absent():
    space = FockSpace(2, HALF, 3)
    # beta = 2 appears neither in the head nor in the tail
    for n in range(2):
        up = y_matrix(space, 0, (-2,), n, dagger=True)
        lhs = direct_N(space, -2, 2, up.target) @ up - up @ direct_N(space, -2, 2, n)
        assert all(x == 0 for x in lhs.data.reshape(-1))


def test_pair_commutator_needs_the_tuple_sum():
    """For a single index tuple the Y^dag Y commutator does not close; summed over tuples it does."""
    space = FockSpace(2, HALF, 3)
    a, b, k = 2, 0, 0
    n = 3
    nab = direct_N(space, a, b, n)
    single_ok = True
    for i in space.modes:
        up = y_matrix(space, k, (i,), n - 2, dagger=True)
        down = y_matrix(space, k, (i,), n)
        s = up @ down
        lhs = nab @ s - s @ nab
        up_a = y_matrix(space, a, (i,), n - 2, dagger=True)
        rhs = up_a @ down if b == k else space.zero_map(n, n)
        if a == k:
            rhs = rhs - up @ y_matrix(space, b, (i,), n)
        single_ok &= bool(np.all(lhs.data == rhs.data))
    assert not single_ok
    total = pair_sum(space, k, k, 1, (0,), n)
    lhs = nab @ total - total @ nab
    # b == k and a != k: only the first delta survives
    rhs = pair_sum(space, a, k, 1, (0,), n)
    assert np.array_equal(lhs.data, rhs.data)


@pytest.mark.parametrize("q", [HALF, 0.5, -0.9])
@pytest.mark.parametrize("twice_j", [1, 2])
def test_Y_commutator_sweep(q, twice_j):
    space = FockSpace(twice_j, q, 3)
    assert check_y_dagger_commutators(space, 2).passed
    assert check_pair_commutators(space, 2).passed


def test_su2jp1_examples():
    space = FockSpace(2, Fraction(1, 3), 3)
    rec = verify_su2jp1_closure(space, 2, 0, 0, 2)
    assert rec.passed and rec.residual == 0
    # [N(1,0), N(0,1)] = N(1,1) - N(0,0) by hand on sector 2
    x, y = direct_N(space, 2, 0, 2), direct_N(space, 0, 2, 2)
    lhs = x @ y - y @ x
    assert np.array_equal(lhs.data, (direct_N(space, 2, 2, 2) - direct_N(space, 0, 0, 2)).data)


def test_su2jp1_distinct_indices_commute():
    space = FockSpace(3, 0.4, 3)
    rec = verify_su2jp1_closure(space, 3, 1, -1, -3)
    assert rec.passed and rec.residual == 0


@pytest.mark.parametrize("q", [-0.9, 0.0, 0.9, HALF])
def test_su2jp1_full_sweep_j1(q):
    rec = check_su2jp1_closure(FockSpace(2, q, 3))
    assert rec.passed and rec.residual == 0 and rec.count == 81 * 4


def test_generator_alias():
    assert Generator(True, 1).adjoint() == Generator(False, 1)
