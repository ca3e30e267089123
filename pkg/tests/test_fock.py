import itertools
import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import annihilate, brute_inner
from quonlab.algebra import QuonAlgebra, q_mutator
from quonlab.fock import (
    FockSpace,
    TruncationError,
    apply_annihilation,
    apply_creation,
    check_positivity,
    inner_product,
    matrix_to_csv,
    matrix_to_json,
    operator_matrix,
)
from quonlab.linalg import to_float

HALF = Fraction(1, 2)


def test_word_enumeration_is_lexicographic():
    space = FockSpace(2, HALF, 2)
    words = space.sector(2).words
    assert words == sorted(words)
    assert len(words) == 9 and words[0] == (-2, -2) and words[-1] == (2, 2)


def test_creation_prepends():
    space = FockSpace(2, HALF, 2)
    assert apply_creation(space, 2, space.vacuum()) == space.basis_vector((2,))
    assert apply_creation(space, 0, space.basis_vector((2,))) == space.basis_vector((0, 2))


def test_creation_norm_from_gram():
    space = FockSpace(2, HALF, 1)
    v = apply_creation(space, 0, space.vacuum())
    g = space.gram(1)
    assert v.coeffs @ g @ v.coeffs == 1


def test_truncation_is_an_error():
    space = FockSpace(1, HALF, 1)
    with pytest.raises(TruncationError):
        apply_creation(space, 1, space.basis_vector((1,)))


def test_annihilation_examples():
    q = Fraction(3, 7)
    space = FockSpace(2, q, 2)
    # modes 1 and 2 of the level are twice_m = 0 and 2
    v = apply_annihilation(space, 2, space.basis_vector((0, 2)))
    assert v.nonzero() == {(0,): q}
    v = apply_annihilation(space, 2, space.basis_vector((2, 2)))
    assert v.nonzero() == {(2,): 1 + q}
    assert apply_annihilation(space, 2, space.vacuum()).nonzero() == {}


@pytest.mark.parametrize("q", [HALF, Fraction(-2, 3), Fraction(0), Fraction(1), Fraction(-1)])
def test_annihilation_matches_rewriter(q):
    space = FockSpace(2, q, 3)
    for n in range(1, 4):
        for word in space.sector(n).words:
            for m in space.modes:
                got = apply_annihilation(space, m, space.basis_vector(word)).nonzero()
                assert got == annihilate(m, word, q)


def test_inner_product_examples():
    q = Fraction(1, 3)
    assert inner_product((0, 2), (0, 2), q) == 1
    assert inner_product((0, 2), (2, 0), q) == q
    assert inner_product((2, 2), (2, 2), q) == 1 + q
    assert inner_product((2,), (2, 2), q) == 0


@pytest.mark.parametrize("twice_j", [0, 1, 2, 3])
def test_gram_is_identity_at_q0(twice_j):
    space = FockSpace(twice_j, Fraction(0), 3)
    for n in range(4):
        assert np.array_equal(space.gram(n), space.q.eye(space.dim(n)))


@pytest.mark.parametrize("q", [HALF, Fraction(-3, 4), 0.5, -0.9])
def test_gram_matches_brute_force(q):
    space = FockSpace(2, q, 3)
    for n in range(4):
        words = space.sector(n).words
        g = space.gram(n)
        for (a, w1), (c, w2) in itertools.product(enumerate(words), repeat=2):
            expected = brute_inner(w1, w2, q)
            if isinstance(q, float):
                assert g[a, c] == pytest.approx(expected, abs=1e-14)
            else:
                assert g[a, c] == expected


def test_positivity_examples():
    rep = check_positivity(FockSpace(1, 0.5, 2), 2)
    assert rep.positive_definite and rep.min_eigenvalue == pytest.approx(0.5)
    assert check_positivity(FockSpace(1, 1, 2), 2).rank == 3
    assert check_positivity(FockSpace(1, -1, 2), 2).rank == 1
    assert check_positivity(FockSpace(1, 1.0, 2), 2).rank == 3
    assert check_positivity(FockSpace(1, -1.0, 2), 2).rank == 1
    exact = check_positivity(FockSpace(1, HALF, 2), 2)
    assert exact.positive_definite and exact.rank == 4 and exact.method == "exact elimination"


@given(st.floats(min_value=-0.95, max_value=0.95), st.integers(1, 3), st.integers(0, 2))
def test_positivity_property(q, n, twice_j):
    rep = check_positivity(FockSpace(twice_j, q, n), n)
    assert rep.positive_definite and rep.min_eigenvalue > 0


@given(st.fractions(min_value=-1, max_value=1, max_denominator=9))
def test_gram_symmetric(q):
    space = FockSpace(1, q, 3)
    for n in range(4):
        g = space.gram(n)
        assert np.array_equal(g, g.T)


@pytest.mark.parametrize("q", [HALF, Fraction(-5, 7), 0.3, -0.9])
def test_gram_adjointness(q):
    """G_n M(b_m) = M(bd_m)^T G_(n+1) between adjacent sectors."""
    space = FockSpace(2, q, 3)
    for n in range(3):
        for m in space.modes:
            lhs = space.gram(n) @ space.annihilation(m, n + 1).data
            rhs = space.creation(m, n).data.T @ space.gram(n + 1)
            if space.q.exact:
                assert np.array_equal(lhs, rhs)
            else:
                np.testing.assert_allclose(to_float(lhs), to_float(rhs), atol=1e-12)


def test_operator_matrix_examples():
    q = HALF
    space = FockSpace(2, q, 3)
    alg = space.algebra
    assert np.array_equal(operator_matrix(space, alg.one(), 2).data, space.identity(2).data)
    number = operator_matrix(space, alg.bd(0) * alg.b(0), 1).data
    assert np.array_equal(number, np.diag([Fraction(0), Fraction(1), Fraction(0)]).astype(object))
    for a, c in itertools.product(space.modes, repeat=2):
        p = q_mutator(alg.b(a), alg.bd(c))
        for n in range(space.n_max):
            expected = space.identity(n).data if a == c else space.zero_map(n, n).data
            assert np.array_equal(operator_matrix(space, p, n).data, expected)


def test_operator_matrix_overflow():
    space = FockSpace(1, HALF, 1)
    with pytest.raises(TruncationError):
        operator_matrix(space, space.algebra.bd(1) * space.algebra.bd(1), 0)


def test_operator_matrix_matches_composition_of_generators():
    space = FockSpace(1, Fraction(2, 3), 3)
    alg = space.algebra
    p = alg.b(1) * alg.bd(-1) * alg.b(1) * alg.bd(1)
    n = 2
    direct = space.annihilation(1, 3) @ space.creation(-1, 2) @ space.annihilation(1, 3) @ space.creation(1, 2)
    assert np.array_equal(operator_matrix(space, p, n).data, direct.data)


def test_dump_formats():
    space = FockSpace(1, HALF, 2)
    doc = json.loads(matrix_to_json(space, 2, space.gram(2)))
    assert doc["j"] == "1/2" and doc["backend"] == "exact" and doc["q"] == "1/2"
    assert doc["matrix"][1] == ["0", "1", "1/2", "0"]
    csv_text = matrix_to_csv(space, 2, space.gram(2))
    assert csv_text.splitlines()[0] == "# j=1/2 twice_j=1 n=2 q=1/2 backend=exact"
    assert csv_text.splitlines()[2] == '"(-1/2,-1/2)",3/2,0,0,0'


def test_algebra_and_space_share_modes():
    assert FockSpace(3, HALF, 1).modes == QuonAlgebra(3, HALF).modes == (-3, -1, 1, 3)
