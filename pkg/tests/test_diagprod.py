from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from algorithms.diagprod import (Square, build_diagonal_product,
                                 conditional_square_distances, conditional_square_distribution,
                                 counting_report, enumerate_squares, enumerate_squares_naive,
                                 estimate_square_cover, gamma_profile, l1_distance,
                                 nontrivial_coordinate_stats, square_cover_distribution,
                                 square_embedding, uniform_on_product)
from libs.errors import BudgetExceededError, ConditioningError, NoSquaresError
from libs.f2core import AffineSubspace, F2Set, FiniteDistribution
from libs.functions import Helper


def _hyperplane(n):
    """{v : suma de bits = 0}."""
    return AffineSubspace(n, 0, tuple((1 << i) | 1 for i in range(1, n))).as_set()


def _random_triple(n, density, seed):
    rng = Helper.task_rng(seed, 0)
    return tuple(F2Set.random(n, density, rng) for _ in range(3))


def test_diagonal_product_sizes():
    n = 4
    full = F2Set.full(n)
    assert len(build_diagonal_product(full, full, full)) == 1 << (2 * n)
    H = _hyperplane(n)
    assert len(build_diagonal_product(H, H, H)) == 1 << (2 * n - 2)
    assert len(build_diagonal_product(full, full, F2Set.empty(n))) == 0


def test_diagonal_product_budget():
    full = F2Set.full(6)
    with pytest.raises(BudgetExceededError):
        build_diagonal_product(full, full, full, max_pairs=100)


def test_square_family_sizes():
    n = 3
    full = F2Set.full(n)
    S = build_diagonal_product(full, full, full)
    assert enumerate_squares(S).count == 1 << (3 * n)
    H = _hyperplane(n)
    assert enumerate_squares(build_diagonal_product(H, H, H)).count == 1 << (3 * (n - 1))
    empty = build_diagonal_product(full, full, F2Set.empty(n))
    assert enumerate_squares(empty).count == 0


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 5), st.integers(0, 2 ** 31 - 1))
def test_optimized_scan_matches_naive(n, seed):
    rng = np.random.default_rng(seed)
    X, Y, Z = (F2Set.random(n, Fraction(int(rng.integers(1, 5)), 4), rng) for _ in range(3))
    S = build_diagonal_product(X, Y, Z)
    T = enumerate_squares(S)
    naive = enumerate_squares_naive(S)
    assert T.count == len(naive)
    assert np.array_equal(T.triples(), naive)


def test_square_points_stay_in_product():
    X, Y, Z = _random_triple(4, Fraction(1, 2), 21)
    S = build_diagonal_product(X, Y, Z)
    for sq in enumerate_squares(S).squares():
        assert all(p in S for p in sq.points())


def test_square_cover_full_space_is_uniform():
    full = F2Set.full(4)
    S = build_diagonal_product(full, full, full)
    mu = square_cover_distribution(S)
    assert l1_distance(mu, uniform_on_product(S)) == 0


def test_square_cover_single_point():
    n = 4
    x0, y0 = 5, 9
    S = build_diagonal_product(F2Set.from_members(n, [x0]), F2Set.from_members(n, [y0]),
                               F2Set.from_members(n, [x0 ^ y0]))
    mu = square_cover_distribution(S)
    assert len(mu) == 1
    assert mu.prob((x0 << n) | y0) == 1


def test_square_cover_needs_squares():
    full = F2Set.full(3)
    S = build_diagonal_product(full, full, F2Set.empty(3))
    with pytest.raises(NoSquaresError):
        square_cover_distribution(S)


def test_square_cover_random_sets_close_to_uniform():
    X, Y, Z = _random_triple(10, Fraction(1, 4), 4)
    S = build_diagonal_product(X, Y, Z)
    mu = square_cover_distribution(S)
    assert l1_distance(mu, uniform_on_product(S)) <= Fraction(1, 4)
    X, Y, Z = _random_triple(10, Fraction(1, 2), 14)
    S = build_diagonal_product(X, Y, Z)
    mu = square_cover_distribution(S)
    assert l1_distance(mu, uniform_on_product(S)) <= Fraction(1, 5)


def test_sampled_estimator_tracks_exact():
    X, Y, Z = _random_triple(6, Fraction(1, 2), 30)
    S = build_diagonal_product(X, Y, Z)
    exact = square_cover_distribution(S)
    estimate = estimate_square_cover(S, 200_000, Helper.task_rng(31, 0))
    assert estimate.accepted > 0
    assert float(l1_distance(exact, estimate.distribution)) < 0.25


def test_counting_report_full_space():
    full = F2Set.full(8)
    report = counting_report(full, full, full)
    assert all(v == 0 for v in report['deviations'].values())
    assert report['l1_mu_us'] == 0
    assert report['mean_nontrivial'] == 4


def test_counting_report_hyperplane():
    n = 6
    H = _hyperplane(n)
    report = counting_report(H, H, H)
    alpha = Fraction(1, 8)
    assert report['values']['size'] / alpha == 2
    assert report['deviations']['size'] == 1
    assert report['values']['gamma_l1'] == 8 * alpha ** 2
    assert report['deviations']['gamma_l1'] == 7
    assert report['cauchy_schwarz']['holds']


def test_counting_report_random_sets():
    X, Y, Z = _random_triple(10, Fraction(1, 4), 4)
    report = counting_report(X, Y, Z)
    deviations = report["deviations"]
    assert all(abs(deviations[k]) <= 0.15 for k in ("size", "gamma_l1", "squares"))
    #a n = 10 el cuadrado w = 0 pesa 1/17 de Gamma
    assert abs(deviations["gamma_l2sq"]) <= 0.3
    assert report["l1_mu_us"] <= Fraction(1, 4)
    assert report['mean_nontrivial'] >= Fraction(45, 100) * 10


@pytest.mark.slow
@pytest.mark.parametrize('seed', range(20))
def test_counting_report_random_sets_n12(seed):
    X, Y, Z = _random_triple(12, Fraction(1, 4), 100 + seed)
    report = counting_report(X, Y, Z)
    assert all(abs(v) <= 0.15 for v in report['deviations'].values())
    assert report['l1_mu_us'] <= Fraction(1, 5)


def test_nontrivial_coordinates():
    full = F2Set.full(5)
    T = enumerate_squares(build_diagonal_product(full, full, full))
    assert nontrivial_coordinate_stats(T).mean == Fraction(5, 2)
    H = _hyperplane(6)
    T = enumerate_squares(build_diagonal_product(H, H, H))
    assert nontrivial_coordinate_stats(T).mean == 3


def test_conditional_distributions_full_space():
    full = F2Set.full(4)
    T = enumerate_squares(build_diagonal_product(full, full, full))
    distances = conditional_square_distances(T)
    assert distances.zero_mass == []
    assert (distances.table['l1'] == 0).all()
    assert distances.mean == 0


def test_conditional_distributions_random_sets():
    X, Y, Z = _random_triple(10, Fraction(1, 2), 14)
    T = enumerate_squares(build_diagonal_product(X, Y, Z))
    assert conditional_square_distances(T).mean <= Fraction(1, 4)
    X, Y, Z = _random_triple(10, Fraction(1, 4), 4)
    T = enumerate_squares(build_diagonal_product(X, Y, Z))
    assert conditional_square_distances(T).mean <= Fraction(3, 10)


def test_conditional_single_point():
    n = 3
    S = build_diagonal_product(F2Set.from_members(n, [1]), F2Set.from_members(n, [2]),
                               F2Set.from_members(n, [3]))
    for i in range(n):
        with pytest.raises(ConditioningError):
            conditional_square_distribution(S, i)


def test_gamma_profile_values():
    full = F2Set.full(3)
    T = enumerate_squares(build_diagonal_product(full, full, full))
    profile = gamma_profile(T)
    assert profile.gamma(3, 5) == 1
    assert profile.l1 == 1
    assert profile.l2sq == 1


def test_square_canonical_form():
    sq = Square(5, 3, 6, 3)
    forms = {Square(x, y, 6, 3).canonical() for x, y in sq.representations()}
    assert forms == {Square(3, 3, 6, 3)}


def test_square_embedding_carries_labels():
    sq = Square(0b1010, 0b0110, 0b0011, 4)
    for i in sq.nontrivial_coordinates():
        for (a, b, c), (x, y, z) in square_embedding(sq, i):
            assert ((x >> i) & 1, (y >> i) & 1, (z >> i) & 1) == (a, b, c)
            assert (x, y) in sq.point_set()


def test_l1_distance_examples():
    P = FiniteDistribution.uniform([1, 2])
    Q = FiniteDistribution.uniform([3, 4])
    assert l1_distance(P, P) == 0
    assert l1_distance(P, Q) == 2
