import math
from fractions import Fraction

import numpy as np
import pytest

from algorithms.concentration import concentration_experiment
from algorithms.games import RepeatedGame, game_value_bruteforce, make_ghz_game
from libs.errors import RejectedInputError
from strategies.product_strategy import ProductStrategy
from strategies.set_strategies import StrategyBattery


def _strategies(n):
    ghz = make_ghz_game()
    _, best = game_value_bruteforce(ghz)
    _, worst = game_value_bruteforce(ghz, minimize=True)
    zeros = [np.zeros(2, dtype=np.int64)] * 3
    return {
        'product_optimal': ProductStrategy.for_game(ghz, best.tables, n, 'product_optimal'),
        'constant': ProductStrategy.for_game(ghz, zeros, n, 'constant'),
        'min_value_product': ProductStrategy.for_game(ghz, worst.tables, n, 'min_value_product'),
    }


def _binomial_tail(n, p, k):
    return sum(math.comb(n, j) * p ** j * (1 - p) ** (n - j) for j in range(k, n + 1))


def test_product_tail_matches_binomial():
    n = 40
    Gn = RepeatedGame(make_ghz_game(), n)
    result = concentration_experiment(_strategies(n), Gn, Fraction(1, 10), 4000, 1)
    assert result.value == Fraction(3, 4)
    assert result.threshold == 34
    row = result.table.set_index('strategy').loc['product_optimal']
    exact = _binomial_tail(n, 0.75, 34)
    assert abs(row['frequency'] - exact) <= 4 * math.sqrt(exact * (1 - exact) / 4000)
    assert row['frequency'] <= result.chernoff_upper + 3 * row['stderr']
    assert row['wilson_low'] <= row['frequency'] <= row['wilson_high']


def test_low_value_strategies_never_reach_threshold():
    n = 40
    Gn = RepeatedGame(make_ghz_game(), n)
    result = concentration_experiment(_strategies(n), Gn, Fraction(1, 10), 2000, 2)
    table = result.table.set_index('strategy')
    assert table.loc['constant', 'hits'] == 0
    assert table.loc['min_value_product', 'hits'] == 0
    assert abs(table.loc['min_value_product', 'mean_wins'] - 10) < 1


def test_chernoff_reference_values():
    n = 40
    Gn = RepeatedGame(make_ghz_game(), n)
    result = concentration_experiment(_strategies(n), Gn, Fraction(1, 10), 10, 3)
    assert result.chernoff_upper == pytest.approx(math.exp(-8 / 45))
    assert result.chernoff_lower == pytest.approx(math.exp(-4 / 15))


def test_same_seed_same_table():
    n = 20
    Gn = RepeatedGame(make_ghz_game(), n)
    first = concentration_experiment(_strategies(n), Gn, Fraction(1, 10), 500, 4)
    second = concentration_experiment(_strategies(n), Gn, Fraction(1, 10), 500, 4)
    assert first.table.equals(second.table)


def test_eps_range():
    Gn = RepeatedGame(make_ghz_game(), 10)
    for eps in (Fraction(0), Fraction(1, 4), Fraction(3, 10)):
        with pytest.raises(RejectedInputError):
            concentration_experiment(_strategies(10), Gn, eps, 10, 1)


def test_needs_seed_and_trials():
    Gn = RepeatedGame(make_ghz_game(), 10)
    with pytest.raises(RejectedInputError):
        concentration_experiment(_strategies(10), Gn, Fraction(1, 10), 10, None)
    with pytest.raises(RejectedInputError):
        concentration_experiment(_strategies(10), Gn, Fraction(1, 10), 0, 1)


@pytest.mark.slow
def test_default_battery_tail_n40():
    n = 40
    Gn = RepeatedGame(make_ghz_game(), n)
    strategies = StrategyBattery(Gn, 7).get_object_strategies()
    assert len(strategies) == 50
    result = concentration_experiment(strategies, Gn, Fraction(3, 20), 100_000, 7)
    assert result.threshold == 36
    assert result.table['frequency'].max() <= 0.05
    row = result.table.set_index('strategy').loc['product_optimal']
    assert row['frequency'] <= result.chernoff_upper + 3 * row['stderr']
