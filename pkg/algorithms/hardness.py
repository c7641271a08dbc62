"""
Experimentos de coordenadas dificiles en juegos repetidos con consultas {(x, y, x+y)}:
cuadrados, eventos producto, subconjuntos aleatorios de coordenadas y eventos de
transcripcion.
"""
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, NamedTuple

import numpy as np
import pandas as pd

from algorithms.diagprod import build_diagonal_product, square_embedding
from algorithms.games import coordinate_wins, evaluate_strategy, make_ghz_game, sample_wins
from libs.config import CHUNK_CELLS, MAX_EXACT_SUPPORT, MAX_PAIRS
from libs.errors import (BudgetExceededError, ConditioningError, PostconditionError,
                         RejectedInputError)

logger = logging.getLogger(__name__)


def _xor_game(game):
    game = game or make_ghz_game()
    if not game.is_xor_game():
        raise RejectedInputError(f"{game.name}: only binary games with uniform query over "
                                 "{(x, y, x+y)} are supported here")
    return game


def _input_wins(s, game, n, xs, ys):
    """Victorias por coordenada en las entradas (x, y, x+y), por bloques."""
    xs = np.asarray(xs, dtype=np.int64)
    ys = np.asarray(ys, dtype=np.int64)
    out = np.zeros((xs.size, n), dtype=bool)
    step = max(1, CHUNK_CELLS // max(1, n))
    for start in range(0, xs.size, step):
        bx = xs[start:start + step]
        by = ys[start:start + step]
        qs = (bx, by, bx ^ by)
        answers = [np.asarray(s.answers(p, qs[p]), dtype=np.int64) for p in range(3)]
        out[start:start + step] = coordinate_wins(game, n, qs, answers)
    return out


# Cuadrados ----------------------------------------------------------------

def hard_square_check(s, square, i, game=None):
    """
    Fraccion de las cuatro entradas del cuadrado en que se gana la coordenada i.

    Parámetros:
      s: estrategia con `answers(player, questions)`.
      square (Square): cuadrado con w_i = 1.
      i (int): coordenada no trivial.
    Retorna:
      Fraction en {0, 1/4, 1/2, 3/4, 1}.
    """
    game = _xor_game(game)
    embedding = square_embedding(square, i)
    for (a, b, c), (x, y, z) in embedding:
        if ((x >> i) & 1, (y >> i) & 1, (z >> i) & 1) != (a, b, c):
            raise PostconditionError(f"square embedding broken at coordinate {i}: "
                                     f"{(x, y, z)} does not carry {(a, b, c)}")
    xs = [x for _, (x, _, _) in embedding]
    ys = [y for _, (_, y, _) in embedding]
    wins = _input_wins(s, game, square.ambient_dim, xs, ys)
    return Fraction(int(wins[:, i].sum()), 4)


def square_hardness_sweep(s, n, game=None):
    """
    Todas las ternas (x, y, w) con w != 0 en el espacio completo y todas sus
    coordenadas no triviales. Se calcula la tabla de victorias W[x, y, i] una vez.

    Retorna:
      pd.Series: histograma de fracciones ganadas (indice en cuartos).
    """
    game = _xor_game(game)
    size = 1 << n
    if size ** 3 * n > MAX_EXACT_SUPPORT:
        raise BudgetExceededError("square sweep over all (x, y, w)", size ** 3 * n, MAX_EXACT_SUPPORT)
    grid = np.arange(size, dtype=np.int64)
    X, Y = np.meshgrid(grid, grid, indexing='ij')
    W = _input_wins(s, game, n, X.ravel(), Y.ravel()).reshape(size, size, n).astype(np.int64)
    counts = np.zeros(5, dtype=np.int64)
    for w in range(1, size):
        total = W + W[grid ^ w] + W[:, grid ^ w] + W[grid ^ w][:, grid ^ w]
        nontrivial = [i for i in range(n) if (w >> i) & 1]
        counts += np.bincount(total[:, :, nontrivial].ravel(), minlength=5)
    return pd.Series(counts, index=[Fraction(k, 4) for k in range(5)], name='squares')


def max_fraction(histogram):
    present = [k for k, v in histogram.items() if v > 0]
    return max(present) if present else Fraction(0)


# Eventos producto --------------------------------------------------------

@dataclass
class ConditionalWins:
    per_coordinate: List[Fraction]
    mean: Fraction
    size: int

    def to_dict(self):
        return {'per_coordinate': [str(p) for p in self.per_coordinate],
                'mean': str(self.mean), 'size': self.size}


def conditional_win_experiment(s, E, F, G, game=None, max_pairs=MAX_PAIRS, product=None):
    """
    Pr[Win_i | E x F x G] exacto para cada i: bajo Q^n condicionada al evento, (x, y) es
    uniforme en S(E, F, G) y z = x + y.
    """
    game = _xor_game(game)
    S = product if product is not None else build_diagonal_product(E, F, G, max_pairs)
    if len(S) == 0:
        raise ConditioningError("S(E,F,G) is empty: the conditioning event has probability 0")
    n = E.ambient_dim
    wins = _input_wins(s, game, n, S.xs, S.ys)
    counts = wins.sum(axis=0)
    per = [Fraction(int(c), len(S)) for c in counts]
    mean = Fraction(int(counts.sum()), len(S) * n)
    return ConditionalWins(per, mean, len(S))


def conditional_win_battery(strategies, E, F, G, game=None, max_pairs=MAX_PAIRS):
    """Una fila por estrategia: media y maximo por coordenada de Pr[Win_i | E x F x G]."""
    S = build_diagonal_product(E, F, G, max_pairs)
    rows = []
    for name, s in strategies.items():
        result = conditional_win_experiment(s, E, F, G, game, product=S)
        rows.append({'strategy': name, 'mean': result.mean, 'mean_float': float(result.mean),
                     'max_coordinate': max(result.per_coordinate), 'size': result.size})
        print(f"strategy: {name} mean={float(result.mean):.4f}")
    return pd.DataFrame(rows, columns=['strategy', 'mean', 'mean_float', 'max_coordinate', 'size'])


# Subconjuntos aleatorios -------------------------------------------------

class SubsetEstimate(NamedTuple):
    value: object
    stderr: float
    coverage: str
    trials: int

    def to_dict(self):
        value = str(self.value) if isinstance(self.value, Fraction) else self.value
        return {'value': value, 'stderr': self.stderr, 'coverage': self.coverage,
                'trials': self.trials}


def win_random_subset(s, Gn, t, trials=0, seed=None, budget=MAX_EXACT_SUPPORT):
    """
    E_{|S|=t} Pr[Win_S]. Para una entrada que gana k coordenadas, la fraccion de
    subconjuntos de tamano t ganados es C(k, t)/C(n, t); el promedio sobre S es exacto
    en ambos modos y solo las entradas se muestrean cuando supp(Q^n) excede el presupuesto.
    """
    n = Gn.n
    if not 1 <= t <= n:
        raise RejectedInputError(f"subset size t={t} must lie in [1, n={n}]")
    total = math.comb(n, t)
    if Gn.support_size <= budget:
        profile = evaluate_strategy(Gn, s, 'exact', budget=budget)
        value = sum((p * Fraction(math.comb(k, t), total) for k, p in enumerate(profile.won_counts)),
                    Fraction(0))
        return SubsetEstimate(value, 0.0, 'exact', 0)
    if seed is None:
        raise RejectedInputError("missing --seed: sampled random-subset estimate needs a seed")
    if trials <= 0:
        raise RejectedInputError("sampled random-subset estimate needs --trials > 0")
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0]))
    z = sample_wins(Gn, s, trials, rng).sum(axis=1)
    ratio = np.array([math.comb(k, t) / total for k in range(n + 1)])
    values = ratio[z]
    stderr = float(values.std(ddof=1) / math.sqrt(trials)) if trials > 1 else float('inf')
    return SubsetEstimate(float(values.mean()), stderr, 'sampled', trials)


# Transcripciones ---------------------------------------------------------

def _pack(values, coords):
    out = np.zeros(values.shape, dtype=np.int64)
    for j, c in enumerate(coords):
        out |= ((values >> c) & 1) << j
    return out


@dataclass
class TranscriptReport:
    table: pd.DataFrame
    expected: Fraction
    max_conditional: Fraction
    coords: List[int]

    def to_dict(self):
        return {'coords': self.coords, 'events': len(self.table),
                'expected': str(self.expected), 'max_conditional': str(self.max_conditional),
                'table': self.table}


def transcript_conditional_report(s, n, coords, game=None, budget=MAX_EXACT_SUPPORT):
    """
    Para cada valor r de (preguntas, respuestas) en `coords`, el evento producto
    E_r x F_r x G_r que induce, su probabilidad y E_{i fuera de coords} Pr[Win_i | R = r].

    Retorna:
      TranscriptReport con una fila por r de probabilidad positiva.
    """
    game = _xor_game(game)
    coords = sorted(set(int(c) for c in coords))
    if any(not 0 <= c < n for c in coords) or len(coords) >= n:
        raise RejectedInputError(f"coordinates {coords} must be a proper subset of range({n})")
    if 4 ** n > budget:
        raise BudgetExceededError("transcript events over all 4^n inputs", 4 ** n, budget)
    m = len(coords)
    outside = [i for i in range(n) if i not in set(coords)]
    size = 1 << n
    ys = np.arange(size, dtype=np.int64)
    rows_per_block = max(1, CHUNK_CELLS // (size * n))
    partial = []
    for start in range(0, size, rows_per_block):
        xs = np.repeat(np.arange(start, min(size, start + rows_per_block), dtype=np.int64), size)
        by = np.tile(ys, xs.size // size)
        qs = (xs, by, xs ^ by)
        answers = [np.asarray(s.answers(p, qs[p]), dtype=np.int64) for p in range(3)]
        wins = coordinate_wins(game, n, qs, answers)
        keys = [_pack(qs[p], coords) | (_pack(answers[p], coords) << m) for p in range(3)]
        frame = pd.DataFrame({'x_event': keys[0], 'y_event': keys[1], 'z_event': keys[2],
                              'count': 1, 'won': wins[:, outside].sum(axis=1)})
        partial.append(frame.groupby(['x_event', 'y_event', 'z_event']).sum())
    grouped = pd.concat(partial).groupby(level=[0, 1, 2]).sum().reset_index()
    total = 4 ** n
    grouped['probability'] = [Fraction(int(c), total) for c in grouped['count']]
    grouped['conditional'] = [Fraction(int(w), int(c) * len(outside))
                              for w, c in zip(grouped['won'], grouped['count'])]
    grouped['conditional_float'] = grouped['won'] / (grouped['count'] * len(outside))
    expected = sum((p * c for p, c in zip(grouped['probability'], grouped['conditional'])),
                   Fraction(0))
    logger.info(f"transcript on {coords}: {len(grouped)} events, expected {float(expected):.4f}")
    return TranscriptReport(grouped, expected, max(grouped['conditional']), coords)
