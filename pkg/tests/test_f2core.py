import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from libs.errors import BudgetExceededError, RejectedInputError
from libs.f2core import (AffineSubspace, F2Set, F2Vector, FiniteDistribution,
                         affine_subspace_count, convolution_inner_product, coset_decompose,
                         density, enumerate_affine_subspaces, gaussian_binomial, load_set,
                         load_subspace, save_set, save_subspace, vec_add)


def test_vec_add_examples():
    assert vec_add(F2Vector(0b0000, 4), F2Vector(0b1011, 4)).bits == 0b1011
    assert vec_add(F2Vector(0b1011, 4), F2Vector(0b1011, 4)).bits == 0b0000
    assert (F2Vector(0b0101, 4) + F2Vector(0b0011, 4)).bits == 0b0110


def test_vec_add_dimension_mismatch():
    with pytest.raises(RejectedInputError):
        vec_add(F2Vector(1, 3), F2Vector(1, 4))


def test_vector_must_fit():
    with pytest.raises(RejectedInputError):
        F2Vector(16, 4)


def test_density_examples():
    full = AffineSubspace.full(4)
    assert density(F2Set.full(4), full) == 1
    assert density(F2Set.empty(4), full) == 0
    hyperplane = AffineSubspace(4, 0, (1, 2, 4))
    assert density(hyperplane.as_set(), hyperplane) == 1
    assert density(hyperplane.as_set(), full) == Fraction(1, 2)


def test_convolution_inner_product_examples():
    full = F2Set.full(5)
    assert convolution_inner_product(full, full, full) == 1
    hyperplane = AffineSubspace(5, 0, (1, 2, 4, 8)).as_set()
    assert convolution_inner_product(hyperplane, hyperplane, hyperplane) == 2


def test_convolution_inner_product_rejects_empty():
    with pytest.raises(RejectedInputError):
        convolution_inner_product(F2Set.full(3), F2Set.empty(3), F2Set.full(3))


def test_convolution_random_sets_near_one():
    rng = np.random.default_rng(np.random.SeedSequence([0, 0]))
    A, B, C = (F2Set.random(8, Fraction(1, 4), rng) for _ in range(3))
    value = convolution_inner_product(A, B, C)
    assert 0.85 <= float(value) <= 1.15


def test_random_set_has_exact_size():
    rng = np.random.default_rng(3)
    A = F2Set.random(6, Fraction(1, 4), rng)
    assert A.size == 16
    assert A.density == Fraction(1, 4)


def test_enumerate_affine_subspaces_counts():
    assert len(list(enumerate_affine_subspaces(AffineSubspace.full(2), 1))) == 6
    assert list(enumerate_affine_subspaces(AffineSubspace.full(3), 0)) == [AffineSubspace.full(3)]
    spaces = list(enumerate_affine_subspaces(AffineSubspace.full(4), 2))
    assert len(spaces) == 140
    assert len(set(spaces)) == 140
    assert all(V.dim == 2 for V in spaces)


def test_subspace_counts():
    assert gaussian_binomial(4, 2) == 35
    assert gaussian_binomial(5, 0) == 1
    assert affine_subspace_count(4, 2) == 140
    assert affine_subspace_count(2, 1) == 6


def test_enumerated_subspaces_match_bruteforce():
    # todos los planos afines de F_2^4 a partir de pares de puntos
    found = set()
    for a, b, c in itertools.product(range(16), repeat=3):
        if b and c and b != c:
            found.add(frozenset(AffineSubspace(4, a, (b, c)).points().tolist()))
    enumerated = {frozenset(V.points().tolist())
                  for V in enumerate_affine_subspaces(AffineSubspace.full(4), 2)}
    assert enumerated == found


def test_enumerate_inside_proper_subspace():
    V = AffineSubspace(5, 0b10000, (1, 2, 4))
    spaces = list(enumerate_affine_subspaces(V, 1))
    assert len(spaces) == gaussian_binomial(3, 1) * 2
    assert all(V.contains_subspace(W) for W in spaces)


def test_enumerate_budget():
    with pytest.raises(BudgetExceededError) as info:
        enumerate_affine_subspaces(AffineSubspace.full(12), 6, budget=1000)
    assert 'sampled' in info.value.advice


def test_coset_decompose_examples():
    V = AffineSubspace.full(3)
    assert len(coset_decompose(V, V)) == 1
    assert len(coset_decompose(V, AffineSubspace(3, 0, (1,)))) == 4
    W = AffineSubspace(4, 0, (0b0011, 0b0100))
    reps = coset_decompose(AffineSubspace.full(4), W)
    assert len(reps) == 4
    for u, v in itertools.combinations(reps, 2):
        assert not W.contains((u + v).bits)


def test_coset_decompose_rejects_non_contained():
    V = AffineSubspace(4, 0, (1, 2))
    with pytest.raises(RejectedInputError):
        coset_decompose(V, AffineSubspace(4, 0, (8,)))


def test_subspace_canonical_form():
    a = AffineSubspace(4, 0b0110, (0b0011, 0b0101))
    b = AffineSubspace(4, 0b0000, (0b0110, 0b0011))
    assert a == b
    assert sorted(a.points().tolist()) == sorted(b.points().tolist())


def test_dependent_basis_rejected():
    with pytest.raises(RejectedInputError):
        AffineSubspace(4, 0, (1, 2, 3))


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 8), st.integers(0, 2 ** 31 - 1), st.data())
def test_local_coordinates_roundtrip_points(n, seed, data):
    rng = np.random.default_rng(seed)
    generators = [int(v) for v in rng.integers(1, 1 << n, size=data.draw(st.integers(0, n)))]
    V = AffineSubspace.span(n, generators, offset=int(rng.integers(0, 1 << n)))
    pts = V.local_points()
    assert np.array_equal(V.to_local(pts), np.arange(V.size))
    assert V.contains_array(pts).all()
    assert np.unique(pts).size == V.size


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 8), st.integers(0, 2 ** 31 - 1))
def test_set_algebra_matches_python_sets(n, seed):
    rng = np.random.default_rng(seed)
    A = F2Set.random(n, Fraction(int(rng.integers(0, 5)), 4), rng)
    B = F2Set.random(n, Fraction(int(rng.integers(0, 5)), 4), rng)
    a, b = set(A), set(B)
    assert set(A & B) == a & b
    assert set(A | B) == a | b
    assert set(A - B) == a - b
    v = int(rng.integers(0, 1 << n))
    assert set(A.shift(v)) == {x ^ v for x in a}


def test_set_files(tmp_path):
    A = F2Set.from_members(5, [0, 3, 17, 31])
    for name in ('a.json', 'a.bin'):
        path = tmp_path / name
        save_set(A, str(path))
        assert load_set(str(path)) == A


def test_subspace_file(tmp_path):
    V = AffineSubspace(5, 0b10001, (0b00011, 0b01100))
    path = tmp_path / 'v.json'
    save_subspace(V, str(path))
    assert load_subspace(str(path)) == V


def test_restrict_to_subspace():
    V = AffineSubspace(4, 0, (1, 2))
    A = F2Set.from_members(4, [0, 3, 4, 7, 15])
    assert set(A.restrict(V)) == {0, 3}
    assert A.restrict(AffineSubspace.full(4)) == A


def test_malformed_set_json(tmp_path):
    path = tmp_path / 'bad.json'
    path.write_text('{"members": [1, 2]}')
    with pytest.raises(RejectedInputError):
        load_set(str(path))


def test_member_outside_space():
    with pytest.raises(RejectedInputError):
        F2Set.from_members(3, [8])


def test_finite_distribution_exact():
    P = FiniteDistribution.from_counts(['a', 'b'], [1, 3])
    assert P.prob('b') == Fraction(3, 4)
    assert P.prob('c') == 0
    with pytest.raises(RejectedInputError):
        FiniteDistribution.from_probabilities(['a', 'b'], [0.5, 0.6])
