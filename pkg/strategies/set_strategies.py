import logging

import numpy as np

from algorithms.games import game_value_bruteforce
from libs.config import MAX_TABLE_REPETITIONS
from libs.errors import RejectedInputError
from libs.functions import Helper
from strategies.hill_climb import hill_climb_table, hill_climb_window
from strategies.product_strategy import ProductStrategy
from strategies.table_strategy import TableStrategy
from strategies.window_strategy import WindowStrategy

logger = logging.getLogger(__name__)

BATTERY_SIZES = {
    'default': (32, 16),
    'small': (8, 4),
    'random': (32, 0),
}


class StrategyBattery:
    """
    Bateria fija de estrategias para G^n: product_optimal, random_00.., hill_climb_00..
    y constant. Cada estrategia sale de su propio generador hijo (semilla, indice).

    Con n <= MAX_TABLE_REPETITIONS las estrategias aleatorias son tablas completas; por
    encima se usan estrategias de ventana de ancho `window`.
    """

    def __init__(self, Gn, seed, kind='default', moves=200, window=2, threshold=None,
                 random_count=None, hill_climb_count=None):
        if kind not in BATTERY_SIZES:
            raise RejectedInputError(f"unknown battery {kind!r}; choose one of {sorted(BATTERY_SIZES)}")
        self.Gn = Gn
        self.seed = Helper.require_seed(seed)
        self.kind = kind
        self.moves = moves
        self.window = window
        self.threshold = threshold
        default_random, default_climb = BATTERY_SIZES[kind]
        self.random_count = default_random if random_count is None else random_count
        self.hill_climb_count = default_climb if hill_climb_count is None else hill_climb_count
        self.tabular = Gn.n <= MAX_TABLE_REPETITIONS
        self.strategies = {}
        self._build()

    def _question_spaces(self):
        return [self.Gn.question_space(p) for p in range(3)]

    def _answer_spaces(self):
        return [self.Gn.answer_space(p) for p in range(3)]

    def _build(self):
        base = self.Gn.base
        n = self.Gn.n
        _, best = game_value_bruteforce(base)
        _, worst = game_value_bruteforce(base, minimize=True)
        self.base_optimal = best.tables
        self.base_minimal = worst.tables
        self.strategies['product_optimal'] = ProductStrategy.for_game(base, best.tables, n,
                                                                       'product_optimal')
        task = 0
        for k in range(self.random_count):
            rng = Helper.task_rng(self.seed, task)
            task += 1
            name = f"random_{k:02d}"
            if self.tabular:
                self.strategies[name] = TableStrategy.random(self._question_spaces(),
                                                             self._answer_spaces(), rng, name)
            else:
                self.strategies[name] = WindowStrategy.random(n, self.window, rng, name)
        if self.hill_climb_count and not base.is_xor_game():
            logger.warning(f"{base.name} is not a binary xor-query game; battery has no hill climbers")
        elif self.hill_climb_count:
            for k in range(self.hill_climb_count):
                rng = Helper.task_rng(self.seed, task)
                task += 1
                name = f"hill_climb_{k:02d}"
                self.strategies[name] = self._hill_climb(rng, name, perturbed=k % 2 == 0)
        zeros = [np.zeros(s, dtype=np.int64) for s in base.question_sizes]
        self.strategies['constant'] = ProductStrategy.for_game(base, zeros, n, 'constant')
        logger.info(f"battery {self.kind}: {len(self.strategies)} strategies for n = {n}")

    def _hill_climb(self, rng, name, perturbed):
        """Los pares arrancan del optimo producto perturbado; los impares de una estrategia aleatoria."""
        n = self.Gn.n
        base = self.Gn.base
        if self.tabular:
            if perturbed:
                start = TableStrategy.from_strategy(self.strategies['product_optimal'],
                                                    self._question_spaces(), name)
                for p in range(3):
                    idx = rng.integers(0, len(start.tables[p]), size=4)
                    start.tables[p][idx] ^= 1 << rng.integers(0, n, size=4)
            else:
                start = TableStrategy.random(self._question_spaces(), self._answer_spaces(), rng, name)
            strategy, _ = hill_climb_table(base, n, start, self.moves, rng, name)
            return strategy
        if perturbed:
            start = WindowStrategy.from_base_tables(self.base_optimal, n, self.window, name)
        else:
            start = WindowStrategy.random(n, self.window, rng, name)
        threshold = self.threshold if self.threshold is not None else 0.9 * n
        strategy, _ = hill_climb_window(self.Gn, start, self.moves, rng, threshold, name=name)
        return strategy

    def minimal_product(self):
        """Estrategia producto de valor minimo en el juego base."""
        return ProductStrategy.for_game(self.Gn.base, self.base_minimal, self.Gn.n, 'min_value_product')

    def get_object_strategies(self):
        return dict(self.strategies)
