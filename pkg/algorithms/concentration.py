"""
Colas de concentracion en juegos repetidos: frecuencia empirica de ganar al menos
(val + eps) n coordenadas, por estrategia, contra la referencia de Chernoff.
"""
import logging
import math
from fractions import Fraction
from typing import NamedTuple

import numpy as np
import pandas as pd

from algorithms.games import game_value_bruteforce, sample_wins
from algorithms.infostats import chernoff_reference, wilson_interval
from libs.errors import RejectedInputError
from libs.functions import Helper

logger = logging.getLogger(__name__)

#Las tareas de evaluacion no se cruzan con las de construccion de la bateria
EVALUATION_TASKS = 1 << 16

COLUMNS = ['strategy', 'trials', 'hits', 'frequency', 'stderr', 'wilson_low', 'wilson_high',
           'mean_wins']


class ConcentrationResult(NamedTuple):
    table: pd.DataFrame
    value: Fraction
    threshold: Fraction
    chernoff_upper: float
    chernoff_lower: float

    def to_dict(self):
        return {'value': str(self.value), 'threshold': str(self.threshold),
                'chernoff_upper': self.chernoff_upper, 'chernoff_lower': self.chernoff_lower,
                'table': self.table}


def concentration_experiment(strategies, Gn, eps, trials, seed, value=None):
    """
    Frecuencia empirica de Z >= (val + eps) n por estrategia, con Z el numero de
    coordenadas ganadas sobre entradas muestreadas de Q^n.

    Parámetros:
      strategies (dict): nombre -> estrategia; la k-esima usa el generador hijo (seed, k).
      eps (Fraction | float): holgura sobre el valor.
      value (Fraction | None): valor del juego base; por defecto se calcula por fuerza bruta.
    Retorna:
      ConcentrationResult con una fila por estrategia y la referencia de Chernoff.
    """
    seed = Helper.require_seed(seed)
    if trials <= 0:
        raise RejectedInputError("concentration needs --trials > 0")
    eps = Fraction(eps).limit_denominator(1 << 20)
    if value is None:
        value, _ = game_value_bruteforce(Gn.base)
    if not 0 < eps < 1 - value:
        raise RejectedInputError(f"eps={eps} must lie in (0, 1 - val) with val={value}")
    n = Gn.n
    threshold = (value + eps) * n
    cut = math.ceil(threshold)
    rows = []
    for task, (name, s) in enumerate(strategies.items()):
        rng = Helper.task_rng(seed, EVALUATION_TASKS + task)
        z = sample_wins(Gn, s, trials, rng).sum(axis=1)
        hits = int((z >= cut).sum())
        freq = hits / trials
        low, high = wilson_interval(hits, trials)
        rows.append({'strategy': name, 'trials': trials, 'hits': hits, 'frequency': freq,
                     'stderr': math.sqrt(freq * (1 - freq) / trials),
                     'wilson_low': low, 'wilson_high': high, 'mean_wins': float(np.mean(z))})
        print(f"strategy: {name} tail={freq:.5f}")
    lower, upper = chernoff_reference(n, value, eps / value)
    logger.info(f"concentration n={n} eps={eps}: {len(rows)} strategies, chernoff upper {upper:.3e}")
    return ConcentrationResult(pd.DataFrame(rows, columns=COLUMNS), value, threshold, upper, lower)
