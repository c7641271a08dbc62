from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from algorithms.spreadness import (BipartiteRelation, SpreadParams, check_algebraic_spread,
                                   check_combinatorial_spread,
                                   check_combinatorial_spread_bruteforce, check_left_marginals,
                                   extract_spread_subset, max_density_increments,
                                   sum_set_relation)
from libs.errors import BudgetExceededError, RejectedInputError
from libs.f2core import AffineSubspace, F2Set, density, enumerate_affine_subspaces
from libs.functions import Helper


def _bruteforce_spread(A, V, r, eps):
    """Maxima razon de densidad sobre todos los subespacios de codimension 1..r."""
    base = density(A, V)
    best = Fraction(1)
    for c in range(1, min(r, V.dim) + 1):
        for W in enumerate_affine_subspaces(V, c):
            best = max(best, density(A, W) / base)
    return best <= 1 + eps, best


def test_full_set_is_spread():
    V = AffineSubspace.full(5)
    verdict = check_algebraic_spread(F2Set.full(5), V, SpreadParams(3, Fraction(1, 4)))
    assert verdict.passed
    assert verdict.observed_ratio == 1
    assert verdict.witness is None


def test_hyperplane_is_not_spread():
    A = AffineSubspace(6, 0, (1, 2, 4, 8, 16))
    verdict = check_algebraic_spread(A.as_set(), AffineSubspace.full(6),
                                     SpreadParams(1, Fraction(1, 2)))
    assert not verdict.passed
    assert verdict.observed_ratio == 2
    assert verdict.witness == A


def test_random_quarter_set_is_spread():
    rng = Helper.task_rng(0, 0)
    A = F2Set.random(10, Fraction(1, 4), rng)
    verdict = check_algebraic_spread(A, AffineSubspace.full(10), SpreadParams(1, Fraction(1, 2)))
    assert verdict.passed
    assert verdict.observed_ratio <= Fraction(3, 2)


def test_empty_set_rejected():
    with pytest.raises(RejectedInputError):
        check_algebraic_spread(F2Set.empty(4), AffineSubspace.full(4), SpreadParams(1, Fraction(1, 2)))


def test_set_outside_subspace_rejected():
    V = AffineSubspace(4, 0, (1, 2))
    with pytest.raises(RejectedInputError):
        check_algebraic_spread(F2Set.from_members(4, [8]), V, SpreadParams(1, Fraction(1, 2)))


def test_epsilon_range():
    with pytest.raises(RejectedInputError):
        SpreadParams(1, Fraction(1))
    with pytest.raises(RejectedInputError):
        SpreadParams(1, 0)


def test_parse_mode():
    assert SpreadParams.parse_mode(2, Fraction(1, 4), 'exact').mode == 'exact'
    p = SpreadParams.parse_mode(2, Fraction(1, 4), 'sampled:500:9')
    assert (p.mode, p.sample_count, p.seed) == ('sampled', 500, 9)
    with pytest.raises(RejectedInputError):
        SpreadParams.parse_mode(2, Fraction(1, 4), 'sampled:500')


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 5), st.integers(1, 3), st.integers(0, 2 ** 31 - 1))
def test_exact_check_matches_bruteforce(n, r, seed):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(1, (1 << n) + 1))
    A = F2Set.from_members(n, rng.choice(1 << n, size=k, replace=False))
    V = AffineSubspace.full(n)
    eps = Fraction(1, 4)
    verdict = check_algebraic_spread(A, V, SpreadParams(r, eps))
    passed, best = _bruteforce_spread(A, V, r, eps)
    assert verdict.passed == passed
    if not passed:
        # el testigo viola y esta dentro de V
        assert density(A, verdict.witness) > (1 + eps) * density(A, V)
        assert V.contains_subspace(verdict.witness)
    if verdict.passed and not verdict.skipped_codims:
        assert verdict.observed_ratio == best


def test_sampled_failure_is_certified():
    A = AffineSubspace(6, 0, (1, 2, 4, 8, 16)).as_set()
    V = AffineSubspace.full(6)
    verdict = check_algebraic_spread(A, V, SpreadParams(2, Fraction(1, 2), 'sampled', 400, 5))
    assert verdict.coverage == 'sampled'
    assert not verdict.passed
    assert density(A, verdict.witness) > Fraction(3, 2) * density(A, V)


def test_sampled_mode_needs_seed():
    with pytest.raises(RejectedInputError):
        SpreadParams(1, Fraction(1, 2), 'sampled', 10, None)


def test_extract_already_spread():
    V = AffineSubspace.full(5)
    X = F2Set.full(5)
    out = extract_spread_subset(X, V, 2, Fraction(1, 2))
    assert out.space == V
    assert out.subset == X
    assert out.log == []


def test_extract_from_codim_two_subspace():
    target = AffineSubspace(6, 0, (1, 2, 4, 8))
    X = target.as_set()
    out = extract_spread_subset(X, AffineSubspace.full(6), 2, Fraction(1, 2))
    assert density(out.subset, out.space) == 1
    assert out.subset.issubset(X)
    assert len(out.log) <= 4
    assert all(step.gain > Fraction(3, 2) for step in out.log)


def test_extract_respects_increment_bound():
    rng = Helper.task_rng(1, 0)
    base = AffineSubspace(8, 0b1000000, (1, 2, 4, 8, 16, 32)).as_set()
    extra = F2Set.from_members(8, rng.choice(256, size=10, replace=False))
    X = base | extra
    eps = Fraction(1, 4)
    out = extract_spread_subset(X, AffineSubspace.full(8), 2, eps)
    assert len(out.log) <= max_density_increments(X.density, eps)
    assert all(step.gain > 1 + eps for step in out.log)
    assert density(out.subset, out.space) >= X.density
    assert check_algebraic_spread(out.subset, out.space, SpreadParams(2, eps)).passed


def test_max_density_increments():
    assert max_density_increments(Fraction(1, 4), Fraction(1, 2)) == 4
    assert max_density_increments(1, Fraction(1, 2)) == 0


def test_combinatorial_constant_relation():
    f = BipartiteRelation(np.ones((6, 5), dtype=bool))
    for r in range(4):
        assert check_combinatorial_spread(f, r, Fraction(1, 4)).passed


def test_combinatorial_rectangle_witness():
    table = np.zeros((8, 8), dtype=bool)
    table[:4, :4] = True
    f = BipartiteRelation(table)
    verdict = check_combinatorial_spread(f, 2, Fraction(1, 2))
    assert not verdict.passed
    assert verdict.observed_ratio == 4
    assert verdict.witness.rows == (0, 1, 2, 3)
    assert verdict.witness.cols == (0, 1, 2, 3)


@pytest.mark.parametrize('seed', range(5))
def test_combinatorial_witness_carries_its_exact_ratio(seed):
    # tablas por bloques: muchos rectangulos empatan en la razon maxima
    rng = Helper.task_rng(seed, 0)
    blocks = rng.random((4, 3)) < 0.5
    blocks[0, 0], blocks[3, 2] = True, False
    table = np.kron(blocks, np.ones((3, 4), dtype=bool)).astype(bool)
    f = BipartiteRelation(table)
    verdict = check_combinatorial_spread(f, 2, Fraction(0))
    assert not verdict.passed
    rows, cols = list(verdict.witness.rows), list(verdict.witness.cols)
    inside = int(table[np.ix_(rows, cols)].sum())
    assert verdict.observed_ratio == Fraction(inside * table.size, f.ones * len(rows) * len(cols))
    assert (len(rows) * len(cols)) << 2 >= table.size
    assert verdict.observed_ratio >= max(Fraction(int(table[i:i + 3].sum()) * table.size, f.ones * 36)
                                         for i in range(0, 12, 3))


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 5), st.integers(1, 5), st.integers(0, 3), st.integers(0, 2 ** 31 - 1))
def test_combinatorial_reduction_matches_bruteforce(rows, cols, r, seed):
    rng = np.random.default_rng(seed)
    table = rng.random((rows, cols)) < 0.5
    table[0, 0] = True
    f = BipartiteRelation(table)
    fast = check_combinatorial_spread(f, r, Fraction(1, 3))
    slow = check_combinatorial_spread_bruteforce(f, r, Fraction(1, 3))
    assert fast.observed_ratio == slow.observed_ratio
    assert fast.passed == slow.passed


def test_combinatorial_zero_mean_rejected():
    with pytest.raises(RejectedInputError):
        check_combinatorial_spread(BipartiteRelation(np.zeros((3, 3), dtype=bool)), 1, Fraction(1, 2))


def test_combinatorial_budget():
    f = BipartiteRelation(np.ones((40, 40), dtype=bool))
    with pytest.raises(BudgetExceededError):
        check_combinatorial_spread(f, 1, Fraction(1, 2))


def test_combinatorial_sum_set_sampled():
    Z = F2Set.random(8, Fraction(1, 4), Helper.task_rng(2, 0))
    f = sum_set_relation(F2Set.full(8), F2Set.full(8), Z)
    verdict = check_combinatorial_spread(f, 2, Fraction(1, 2), 'sampled', 10 ** 4, 3)
    assert verdict.coverage == 'sampled'
    assert verdict.passed


def test_left_marginals_constant():
    f = BipartiteRelation(np.ones((5, 5), dtype=bool))
    assert check_left_marginals(f, 3, Fraction(1, 2)).passed


def test_left_marginals_boundary():
    table = np.ones((256, 4), dtype=bool)
    table[17] = False
    f = BipartiteRelation(table)
    verdict = check_left_marginals(f, 8, Fraction(1, 2))
    assert verdict.passed
    assert verdict.observed_ratio == Fraction(1, 256)
    table[18] = False
    verdict = check_left_marginals(BipartiteRelation(table), 8, Fraction(1, 2))
    assert not verdict.passed
    assert verdict.witness == (17, 18)


def test_left_marginals_sum_set():
    Z = F2Set.random(8, Fraction(1, 4), Helper.task_rng(2, 0))
    f = sum_set_relation(F2Set.full(8), F2Set.full(8), Z)
    assert check_left_marginals(f, 4, Fraction(1, 4)).passed


def test_sum_set_relation_examples():
    n = 5
    assert sum_set_relation(F2Set.full(n), F2Set.full(n), F2Set.full(n)).table.all()
    assert not sum_set_relation(F2Set.full(n), F2Set.full(n), F2Set.empty(n)).table.any()
    H = AffineSubspace(n, 0, (1, 2, 4, 8)).as_set()
    f = sum_set_relation(H, H, H)
    assert f.table.all()
    assert f.mean == 1 == 2 * H.density
