from fractions import Fraction

import numpy as np
import pytest

from algorithms.diagprod import Square
from algorithms.games import (Game, RepeatedGame, evaluate_strategy, game_value_bruteforce,
                              make_ghz_game)
from algorithms.hardness import (conditional_win_battery, conditional_win_experiment,
                                 hard_square_check, max_fraction, square_hardness_sweep,
                                 transcript_conditional_report, win_random_subset)
from algorithms.spreadness import SpreadParams, check_algebraic_spread
from libs.errors import BudgetExceededError, ConditioningError, RejectedInputError
from libs.f2core import AffineSubspace, F2Set, FiniteDistribution
from libs.functions import Helper
from strategies.product_strategy import ProductStrategy
from strategies.set_strategies import StrategyBattery
from strategies.table_strategy import TableStrategy


def _product_optimal(n):
    ghz = make_ghz_game()
    _, best = game_value_bruteforce(ghz)
    return ProductStrategy.for_game(ghz, best.tables, n, 'product_optimal')


def _constant(n):
    zeros = [np.zeros(2, dtype=np.int64)] * 3
    return ProductStrategy.for_game(make_ghz_game(), zeros, n, 'constant')


def _random_table(n, seed):
    return TableStrategy.random([1 << n] * 3, [1 << n] * 3, Helper.task_rng(seed, 0))


def test_constant_strategy_wins_one_input_per_square():
    n = 4
    s = _constant(n)
    for x, y, w in [(0, 0, 1), (5, 9, 6), (15, 3, 12), (7, 7, 15)]:
        square = Square(x, y, w, n)
        for i in square.nontrivial_coordinates():
            assert hard_square_check(s, square, i) == Fraction(1, 4)


def test_square_check_rejects_trivial_coordinate():
    with pytest.raises(RejectedInputError):
        hard_square_check(_constant(3), Square(1, 2, 0b001, 3), 1)


def test_square_check_needs_xor_game():
    point = FiniteDistribution.uniform([(0, 0, 0)])
    game = Game([[0, 1]] * 3, [[0, 1]] * 3, point, np.ones((2,) * 6, dtype=bool), 'point')
    with pytest.raises(RejectedInputError):
        hard_square_check(_constant(3), Square(1, 2, 1, 3), 0, game)


def test_square_sweep_product_optimal():
    n = 3
    hist = square_hardness_sweep(_product_optimal(n), n)
    # cada (x, y, w) cuenta una vez por coordenada no trivial
    assert int(hist.sum()) == (1 << (2 * n)) * sum(bin(w).count('1') for w in range(1, 1 << n))
    assert max_fraction(hist) == Fraction(3, 4)
    assert hist[Fraction(1)] == 0


@pytest.mark.parametrize('seed', range(5))
def test_square_sweep_random_tables_never_win_all(seed):
    n = 3
    hist = square_hardness_sweep(_random_table(n, seed), n)
    assert hist[Fraction(1)] == 0
    assert max_fraction(hist) <= Fraction(3, 4)


@pytest.mark.slow
def test_square_sweep_many_random_tables():
    n = 4
    worst = max(max_fraction(square_hardness_sweep(_random_table(n, 1000 + k), n))
                for k in range(100))
    assert worst == Fraction(3, 4)


def test_square_sweep_matches_single_checks():
    n = 3
    s = _random_table(n, 7)
    hist = square_hardness_sweep(s, n)
    counts = {Fraction(k, 4): 0 for k in range(5)}
    for x in range(1 << n):
        for y in range(1 << n):
            for w in range(1, 1 << n):
                square = Square(x, y, w, n)
                for i in square.nontrivial_coordinates():
                    counts[hard_square_check(s, square, i)] += 1
    assert {k: int(v) for k, v in hist.items()} == counts


def test_square_sweep_budget():
    with pytest.raises(BudgetExceededError):
        square_hardness_sweep(_constant(10), 10)


def test_conditional_wins_full_space():
    n = 4
    full = F2Set.full(n)
    result = conditional_win_experiment(_product_optimal(n), full, full, full)
    assert result.size == 1 << (2 * n)
    assert all(p == Fraction(3, 4) for p in result.per_coordinate)
    assert result.mean == Fraction(3, 4)


def test_conditional_wins_single_point():
    n = 4
    s = _random_table(n, 8)
    x0, y0 = 6, 11
    result = conditional_win_experiment(s, F2Set.from_members(n, [x0]), F2Set.from_members(n, [y0]),
                                        F2Set.from_members(n, [x0 ^ y0]))
    assert result.size == 1
    assert all(p in (0, 1) for p in result.per_coordinate)
    answers = [s.answer(p, q) for p, q in enumerate((x0, y0, x0 ^ y0))]
    ghz = make_ghz_game()
    for i, p in enumerate(result.per_coordinate):
        bits = [(q >> i) & 1 for q in (x0, y0, x0 ^ y0)] + [(a >> i) & 1 for a in answers]
        assert p == int(ghz.win(bits[:3], bits[3:]))


def test_conditional_wins_empty_event():
    full = F2Set.full(3)
    with pytest.raises(ConditioningError):
        conditional_win_experiment(_constant(3), full, full, F2Set.empty(3))


def test_conditional_battery_table():
    n = 3
    full = F2Set.full(n)
    strategies = {'product_optimal': _product_optimal(n), 'constant': _constant(n)}
    table = conditional_win_battery(strategies, full, full, full)
    assert list(table['strategy']) == ['product_optimal', 'constant']
    assert list(table['mean']) == [Fraction(3, 4), Fraction(1, 4)]
    assert (table['size'] == 1 << (2 * n)).all()


def test_random_subset_single_coordinate_is_mean():
    n = 3
    s = _random_table(n, 9)
    Gn = RepeatedGame(make_ghz_game(), n)
    estimate = win_random_subset(s, Gn, 1)
    assert estimate.coverage == 'exact'
    assert estimate.value == evaluate_strategy(Gn, s).mean_coordinate()


@pytest.mark.parametrize('t', [1, 2, 3, 4])
def test_random_subset_product(t):
    n = 4
    Gn = RepeatedGame(make_ghz_game(), n)
    assert win_random_subset(_product_optimal(n), Gn, t).value == Fraction(3, 4) ** t


def test_random_subset_sampled():
    n = 4
    Gn = RepeatedGame(make_ghz_game(), n)
    estimate = win_random_subset(_product_optimal(n), Gn, 2, trials=20_000, seed=3, budget=10)
    assert estimate.coverage == 'sampled'
    assert abs(estimate.value - 9 / 16) <= 4 * estimate.stderr
    with pytest.raises(RejectedInputError):
        win_random_subset(_product_optimal(n), Gn, 2, trials=100, budget=10)


def test_random_subset_size_range():
    Gn = RepeatedGame(make_ghz_game(), 3)
    for t in (0, 4):
        with pytest.raises(RejectedInputError):
            win_random_subset(_constant(3), Gn, t)


def test_transcript_expectation_matches_profile():
    n = 3
    s = _random_table(n, 10)
    report = transcript_conditional_report(s, n, [0])
    profile = evaluate_strategy(RepeatedGame(make_ghz_game(), n), s)
    assert report.expected == sum(profile.per_coordinate[1:], Fraction(0)) / 2
    assert sum(report.table['probability'], Fraction(0)) == 1


def test_transcript_product_strategy():
    n = 3
    report = transcript_conditional_report(_product_optimal(n), n, [1])
    assert report.expected == Fraction(3, 4)
    assert report.max_conditional == Fraction(3, 4)
    assert report.coords == [1]


def test_transcript_coordinates_validated():
    with pytest.raises(RejectedInputError):
        transcript_conditional_report(_constant(3), 3, [0, 1, 2])
    with pytest.raises(RejectedInputError):
        transcript_conditional_report(_constant(3), 3, [5])
    with pytest.raises(BudgetExceededError):
        transcript_conditional_report(_constant(3), 3, [0], budget=10)


@pytest.fixture(scope='module')
def default_battery_n10():
    Gn = RepeatedGame(make_ghz_game(), 10)
    return Gn, StrategyBattery(Gn, 0).get_object_strategies()


@pytest.mark.slow
def test_conditional_battery_on_spread_events(default_battery_n10):
    Gn, strategies = default_battery_n10
    n = Gn.n
    assert len(strategies) == 50
    events = [F2Set.random(n, Fraction(1, 2), Helper.task_rng(s, 0)) for s in (14, 15, 16)]
    params = SpreadParams(1, Fraction(1, 4))
    for A in events:
        assert check_algebraic_spread(A, AffineSubspace.full(n), params).passed
    table = conditional_win_battery(strategies, *events)
    assert max(table['mean']) <= Fraction(17, 20)
    product = table.set_index('strategy').loc['product_optimal', 'mean_float']
    assert abs(product - 0.75) < 0.02


@pytest.mark.slow
def test_random_subsets_default_battery(default_battery_n10):
    Gn, strategies = default_battery_n10
    for s in strategies.values():
        for t in (1, 2, 3):
            estimate = win_random_subset(s, Gn, t)
            assert estimate.coverage == 'exact'
            assert estimate.value <= 2 * Fraction(17, 20) ** t
