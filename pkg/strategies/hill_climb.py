"""
Busqueda local sobre estrategias deterministas. Los movimientos cambian un solo bit de
una respuesta y se aceptan si el objetivo no empeora.
"""
import logging
import math

import numpy as np

from algorithms.games import coordinate_wins, sample_questions
from libs.config import CHUNK_CELLS
from libs.errors import RejectedInputError
from strategies.table_strategy import TableStrategy

logger = logging.getLogger(__name__)


def _require_xor(game):
    if not game.is_xor_game():
        raise RejectedInputError(f"hill climbing on tables needs a binary xor-query game, got {game.name}")


def all_win_matrix(game, n, strategy):
    """M[x, y] = se ganan todas las coordenadas en la entrada (x, y, x+y)."""
    size = 1 << n
    M = np.zeros((size, size), dtype=bool)
    ys = np.arange(size, dtype=np.int64)
    rows = max(1, CHUNK_CELLS // (size * max(1, n)))
    for start in range(0, size, rows):
        xs = np.arange(start, min(size, start + rows), dtype=np.int64)
        qx = np.repeat(xs, size)
        qy = np.tile(ys, len(xs))
        qz = qx ^ qy
        answers = [strategy.answers(p, q) for p, q in enumerate((qx, qy, qz))]
        wins = coordinate_wins(game, n, (qx, qy, qz), answers).all(axis=1)
        M[start:start + len(xs)] = wins.reshape(len(xs), size)
    return M


def _affected(player, question, size):
    """Entradas (x, y) cuya pregunta del jugador es `question`."""
    idx = np.arange(size, dtype=np.int64)
    if player == 0:
        return np.full(size, question, dtype=np.int64), idx
    if player == 1:
        return idx, np.full(size, question, dtype=np.int64)
    return idx, idx ^ question


def hill_climb_table(game, n, start, moves, rng, name='hill-climb'):
    """
    Maximiza Pr[ganar todas las coordenadas] de una TableStrategy en G^n, con
    reevaluacion incremental: cambiar f(x0) solo afecta las 2^n entradas con x = x0.

    Parámetros:
      start (TableStrategy): punto de partida.
      moves (int): numero de propuestas.
    Retorna:
      (TableStrategy, int): estrategia final y numero de entradas ganadas.
    """
    _require_xor(game)
    size = 1 << n
    tables = [t.copy() for t in start.tables]
    current = TableStrategy(tables, name)
    M = all_win_matrix(game, n, current)
    score = int(M.sum())
    accepted = 0
    for _ in range(moves):
        player = int(rng.integers(3))
        question = int(rng.integers(size))
        bit = int(rng.integers(n))
        old = tables[player][question]
        tables[player][question] = old ^ (1 << bit)
        xs, ys = _affected(player, question, size)
        qs = (xs, ys, xs ^ ys)
        answers = [tables[p][qs[p]] for p in range(3)]
        new = coordinate_wins(game, n, qs, answers).all(axis=1)
        delta = int(new.sum()) - int(M[xs, ys].sum())
        if delta >= 0:
            M[xs, ys] = new
            score += delta
            accepted += 1
        else:
            tables[player][question] = old
    logger.debug(f"{name}: {accepted}/{moves} moves accepted, {score} winning inputs")
    return TableStrategy(tables, name), score


def tail_objective(wins, threshold):
    """(#muestras con Z >= threshold, total de coordenadas ganadas)."""
    z = wins.sum(axis=1)
    return int((z >= math.ceil(threshold)).sum()), int(z.sum())


def hill_climb_window(Gn, start, moves, rng, threshold, sample_size=2048, name='hill-climb'):
    """
    Busqueda local sobre una WindowStrategy cuando G^n no se puede enumerar. El objetivo
    es la cola Pr[Z >= threshold] sobre una muestra fija de entradas, con desempate por
    el total de coordenadas ganadas.
    """
    _require_xor(Gn.base)
    questions = sample_questions(Gn, sample_size, rng)
    current = start
    best = tail_objective(_wins(Gn, current, questions), threshold)
    for _ in range(moves):
        player = int(rng.integers(3))
        coordinate = int(rng.integers(current.n))
        pattern = int(rng.integers(1 << current.k))
        candidate = current.flipped(player, coordinate, pattern)
        score = tail_objective(_wins(Gn, candidate, questions), threshold)
        if score >= best:
            current, best = candidate, score
    current = type(current)(current.tables.copy(), name)
    logger.debug(f"{name}: objective {best} on {sample_size} sampled inputs")
    return current, best


def _wins(Gn, strategy, questions):
    answers = [strategy.answers(p, questions[p]) for p in range(3)]
    return coordinate_wins(Gn.base, Gn.n, questions, answers)
