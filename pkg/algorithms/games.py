"""
Juegos finitos de 3 jugadores, repeticion en paralelo, valor exacto y evaluacion de
estrategias.

Preguntas y respuestas de un juego repetido se codifican como enteros en base |alfabeto|
(digito i = coordenada i); para alfabetos binarios son bitmasks.
"""
import itertools
import json
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional

import numpy as np

from libs.config import CHUNK_CELLS, MAX_EXACT_SUPPORT, MAX_STRATEGY_PAIRS
from libs.errors import BudgetExceededError, RejectedInputError
from libs.f2core import FiniteDistribution

logger = logging.getLogger(__name__)


class Game:
    """
    Juego (alfabetos, Q, V). `query` es una FiniteDistribution exacta sobre ternas de
    indices (ix, iy, iz); `predicate` es un arreglo booleano (kx, ky, kz, ka, kb, kc).
    """

    def __init__(self, question_alphabets, answer_alphabets, query, predicate, name='game'):
        self.question_alphabets = tuple(list(a) for a in question_alphabets)
        self.answer_alphabets = tuple(list(a) for a in answer_alphabets)
        if len(self.question_alphabets) != 3 or len(self.answer_alphabets) != 3:
            raise RejectedInputError("a game needs three question and three answer alphabets")
        self.question_sizes = tuple(len(a) for a in self.question_alphabets)
        self.answer_sizes = tuple(len(a) for a in self.answer_alphabets)
        predicate = np.array(predicate, dtype=bool, copy=True)
        if predicate.shape != self.question_sizes + self.answer_sizes:
            raise RejectedInputError(f"predicate shape {predicate.shape} does not match alphabets")
        if not query.is_exact:
            raise RejectedInputError("query distribution must have rational weights")
        for point in query.support:
            if len(point) != 3 or any(not 0 <= q < k for q, k in zip(point, self.question_sizes)):
                raise RejectedInputError(f"query point {point} outside the question alphabets")
        predicate.setflags(write=False)
        self.query = query
        self.predicate = predicate
        self.name = name
        self.support = np.array([list(p) for p in query.support], dtype=np.int64)
        self.weights = np.array([int(w) for w in query.weights.tolist()], dtype=np.int64)
        self.denominator = int(query.denominator)

    def win(self, question, answer):
        return bool(self.predicate[tuple(question) + tuple(answer)])

    def query_table(self):
        """Numeradores de Q como arreglo denso (kx, ky, kz)."""
        table = np.zeros(self.question_sizes, dtype=np.int64)
        for (x, y, z), w in zip(self.support.tolist(), self.weights.tolist()):
            table[x, y, z] = w
        return table

    def is_xor_game(self):
        """Alfabetos binarios y Q uniforme sobre {(x, y, x+y)}."""
        if self.question_sizes != (2, 2, 2) or self.answer_sizes != (2, 2, 2):
            return False
        expected = {(x, y, x ^ y) for x in (0, 1) for y in (0, 1)}
        points = {tuple(p) for p in self.support.tolist()}
        return points == expected and len(set(self.weights.tolist())) == 1

    def to_json(self):
        qa = self.question_alphabets
        aa = self.answer_alphabets
        return {
            'name': self.name,
            'alphabets': {'questions': [list(a) for a in qa], 'answers': [list(a) for a in aa]},
            'query': [{'x': qa[0][x], 'y': qa[1][y], 'z': qa[2][z], 'weight_num': int(w),
                       'weight_den': self.denominator}
                      for (x, y, z), w in zip(self.support.tolist(), self.weights.tolist())],
            'predicate': [{'x': qa[0][q[0]], 'y': qa[1][q[1]], 'z': qa[2][q[2]],
                           'a': aa[0][q[3]], 'b': aa[1][q[4]], 'c': aa[2][q[5]], 'win': True}
                          for q in np.argwhere(self.predicate).tolist()],
        }

    @classmethod
    def from_json(cls, data):
        try:
            alphabets = data['alphabets']
            questions = alphabets['questions']
            answers = alphabets['answers']
            q_index = [{_label(v): i for i, v in enumerate(a)} for a in questions]
            a_index = [{_label(v): i for i, v in enumerate(a)} for a in answers]
            weights = [Fraction(int(e['weight_num']), int(e['weight_den'])) for e in data['query']]
            points = [tuple(q_index[p][_label(e[k])] for p, k in enumerate('xyz'))
                      for e in data['query']]
            predicate = np.zeros(tuple(len(a) for a in questions) + tuple(len(a) for a in answers),
                                 dtype=bool)
            for e in data['predicate']:
                idx = (tuple(q_index[p][_label(e[k])] for p, k in enumerate('xyz'))
                       + tuple(a_index[p][_label(e[k])] for p, k in enumerate('abc')))
                predicate[idx] = bool(e.get('win', True))
        except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
            raise RejectedInputError(f"malformed game description: {exc!r}") from exc
        if sum(weights) != 1:
            raise RejectedInputError(f"query weights sum to {sum(weights)}, not 1")
        den = math.lcm(*[w.denominator for w in weights]) if weights else 1
        query = FiniteDistribution.from_counts(points, [w.numerator * (den // w.denominator)
                                                        for w in weights])
        return cls(questions, answers, query, predicate, data.get('name', 'game'))


def _label(value):
    #JSON guarda las tuplas de los juegos repetidos como listas
    return tuple(_label(v) for v in value) if isinstance(value, list) else value


def load_game(path):
    try:
        with open(path, 'r', encoding='utf-8') as f:
            return Game.from_json(json.load(f))
    except (OSError, json.JSONDecodeError) as exc:
        raise RejectedInputError(f"{path}: {exc}") from exc


def save_game(game, path):
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(game.to_json(), f, indent=1)


def make_ghz_game():
    """Q uniforme sobre x+y+z = 0; se gana si a+b+c = x OR y OR z (mod 2)."""
    points = [(0, 0, 0), (0, 1, 1), (1, 0, 1), (1, 1, 0)]
    predicate = np.zeros((2,) * 6, dtype=bool)
    for x, y, z, a, b, c in itertools.product((0, 1), repeat=6):
        predicate[x, y, z, a, b, c] = (a ^ b ^ c) == (x | y | z)
    return Game([[0, 1]] * 3, [[0, 1]] * 3, FiniteDistribution.uniform(points), predicate, 'ghz')


def make_constant_game(value=True):
    ghz = make_ghz_game()
    predicate = np.full(ghz.predicate.shape, bool(value))
    return Game([[0, 1]] * 3, [[0, 1]] * 3, ghz.query, predicate, f"constant-{bool(value)}")


# Repeticion ---------------------------------------------------------------

@dataclass
class RepeatedGame:
    base: Game
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise RejectedInputError("repetitions must be positive")

    @property
    def support_size(self):
        return len(self.base.support) ** self.n

    @property
    def denominator(self):
        return self.base.denominator ** self.n

    def question_space(self, player):
        return self.base.question_sizes[player] ** self.n

    def answer_space(self, player):
        return self.base.answer_sizes[player] ** self.n

    def materialize(self):
        """Juego explicito G^n: alfabetos de tuplas, Q producto y V producto."""
        base = self.base
        cells = np.prod([s ** self.n for s in base.question_sizes + base.answer_sizes],
                        dtype=object)
        if cells > MAX_EXACT_SUPPORT:
            raise BudgetExceededError("materializing the repeated game predicate", cells,
                                      MAX_EXACT_SUPPORT)
        questions = [_labels(a, self.n) for a in base.question_alphabets]
        answers = [_labels(a, self.n) for a in base.answer_alphabets]
        points = []
        counts = []
        for combo in itertools.product(range(len(base.support)), repeat=self.n):
            triple = base.support[list(combo)]
            points.append(tuple(_encode(triple[:, p], base.question_sizes[p]) for p in range(3)))
            counts.append(int(np.prod(base.weights[list(combo)], dtype=object)))
        query = FiniteDistribution.from_counts(points, counts)
        shape = tuple(s ** self.n for s in base.question_sizes + base.answer_sizes)
        predicate = np.ones(shape, dtype=bool)
        for i in range(self.n):
            digits = [(np.arange(s ** self.n) // s ** i) % s
                      for s in base.question_sizes + base.answer_sizes]
            predicate &= base.predicate[np.ix_(*digits)]
        return Game(questions, answers, query, predicate, f"{base.name}^{self.n}")


def _labels(alphabet, n):
    #etiqueta k = tupla de digitos de k, coordenada 0 primero
    return [tuple(reversed(t)) for t in itertools.product(alphabet, repeat=n)]


def _encode(digits, radix):
    out = 0
    for i, d in enumerate(digits):
        out += int(d) * radix ** i
    return out


def digits_of(values, radix, n):
    """Matriz (m, n) con los digitos de cada entero."""
    values = np.asarray(values, dtype=np.int64)
    if radix == 2:
        return (values[:, None] >> np.arange(n)[None, :]) & 1
    powers = radix ** np.arange(n, dtype=np.int64)
    return (values[:, None] // powers[None, :]) % radix


def coordinate_wins(base, n, questions, answers):
    """Matriz booleana (m, n): la coordenada i se gana en cada entrada."""
    q = [digits_of(questions[p], base.question_sizes[p], n) for p in range(3)]
    a = [digits_of(answers[p], base.answer_sizes[p], n) for p in range(3)]
    return base.predicate[q[0], q[1], q[2], a[0], a[1], a[2]]


# Valor -------------------------------------------------------------------

def _all_tables(k_answers, k_questions):
    return np.array(list(itertools.product(range(k_answers), repeat=k_questions)), dtype=np.int64)


def game_value_bruteforce(G, minimize=False, budget=MAX_STRATEGY_PAIRS):
    """
    Maximo exacto sobre estrategias deterministas. Para cada (f, g) la respuesta de z se
    elige por separado en cada pregunta z (mejor respuesta), asi que se recorren solo
    |A|^|X| * |B|^|Y| pares. Con minimize=True devuelve el minimo.

    Retorna:
      (Fraction, TableStrategy testigo)
    """
    from strategies.table_strategy import TableStrategy
    kx, ky, kz = G.question_sizes
    ka, kb, kc = G.answer_sizes
    pairs = ka ** kx * kb ** ky
    if pairs > budget:
        raise BudgetExceededError("value brute force over (f, g)", pairs, budget)
    Q = G.query_table()
    V = G.predicate
    Fs = _all_tables(ka, kx)
    Gs = _all_tables(kb, ky)
    best = None
    witness = None
    for fi, f in enumerate(Fs):
        # W[y, z, b, c] = sum_x Q[x,y,z] V[x,y,z,f(x),b,c]
        W = np.zeros((ky, kz, kb, kc), dtype=np.int64)
        for x in range(kx):
            W += Q[x][:, :, None, None] * V[x, :, :, f[x]]
        # total[g, z, c] = sum_y W[y, z, g(y), c]
        total = np.zeros((len(Gs), kz, kc), dtype=np.int64)
        for y in range(ky):
            total += np.transpose(W[y][:, Gs[:, y], :], (1, 0, 2))
        pick = total.min(axis=2) if minimize else total.max(axis=2)
        scores = pick.sum(axis=1)
        gi = int(scores.argmin() if minimize else scores.argmax())
        score = int(scores[gi])
        if best is None or (score < best if minimize else score > best):
            best = score
            h = total[gi].argmin(axis=1) if minimize else total[gi].argmax(axis=1)
            witness = (f.copy(), Gs[gi].copy(), h.astype(np.int64))
    value = Fraction(best, G.denominator)
    logger.info(f"value of {G.name}: {value} ({pairs} (f, g) pairs)")
    return value, TableStrategy(witness, name='bruteforce-optimal' if not minimize else 'bruteforce-minimal')


def game_value_exhaustive(G):
    """Busqueda sobre los tres jugadores; solo para validar la mejor respuesta."""
    kx, ky, kz = G.question_sizes
    ka, kb, kc = G.answer_sizes
    best = -1
    support = G.support.tolist()
    weights = G.weights.tolist()
    for f in itertools.product(range(ka), repeat=kx):
        for g in itertools.product(range(kb), repeat=ky):
            for h in itertools.product(range(kc), repeat=kz):
                score = sum(w for (x, y, z), w in zip(support, weights)
                            if G.predicate[x, y, z, f[x], g[y], h[z]])
                best = max(best, score)
    return Fraction(best, G.denominator)


# Evaluacion --------------------------------------------------------------

@dataclass
class WinProfile:
    """
    Probabilidades de ganar por coordenada y en todas. `won_counts[k]` es la
    probabilidad de ganar exactamente k coordenadas.
    """
    per_coordinate: List[object]
    overall: object
    won_counts: List[object]
    coverage: str = 'exact'
    samples: int = 0
    stderr: Optional[List[float]] = None
    overall_stderr: Optional[float] = None

    @property
    def n(self):
        return len(self.per_coordinate)

    def mean_coordinate(self):
        return sum(self.per_coordinate, Fraction(0) if self.coverage == 'exact' else 0.0) / self.n

    def tail(self, threshold):
        """Pr[Z >= threshold]."""
        start = max(0, math.ceil(threshold))
        zero = Fraction(0) if self.coverage == 'exact' else 0.0
        return sum(self.won_counts[start:], zero)

    def to_dict(self):
        return {
            'coverage': self.coverage,
            'samples': self.samples,
            'per_coordinate': [str(p) if isinstance(p, Fraction) else p for p in self.per_coordinate],
            'overall': str(self.overall) if isinstance(self.overall, Fraction) else self.overall,
            'won_counts': [str(p) if isinstance(p, Fraction) else p for p in self.won_counts],
            'stderr': self.stderr,
            'overall_stderr': self.overall_stderr,
        }


def _support_chunk(Gn, start, stop):
    """Preguntas y pesos de los indices [start, stop) del soporte de Q^n."""
    base = Gn.base
    s = len(base.support)
    idx = np.arange(start, stop, dtype=np.int64)
    combo = digits_of(idx, s, Gn.n)
    questions = []
    for p in range(3):
        digits = base.support[combo, p]
        radix = base.question_sizes[p]
        powers = radix ** np.arange(Gn.n, dtype=np.int64)
        questions.append((digits * powers[None, :]).sum(axis=1))
    weights = np.prod(base.weights[combo], axis=1)
    return questions, weights


def _answers(strategy, questions):
    return [np.asarray(strategy.answers(p, questions[p]), dtype=np.int64) for p in range(3)]


def evaluate_strategy(Gn, s, mode='exact', samples=0, seed=None, budget=MAX_EXACT_SUPPORT):
    """
    Perfil de victorias de `s` en G^n. Exacto enumerando el soporte de Q^n (con
    presupuesto); muestreado con semilla explicita.
    """
    n = Gn.n
    if mode == 'exact':
        if Gn.support_size > budget:
            raise BudgetExceededError("exact evaluation over supp(Q^n)", Gn.support_size, budget,
                                      advice="use sampled evaluation with --samples and --seed")
        if Gn.denominator >= (1 << 62):
            raise BudgetExceededError("exact weights of Q^n", Gn.denominator, 1 << 62)
        per = np.zeros(n, dtype=np.int64)
        hist = np.zeros(n + 1, dtype=np.int64)
        step = max(1, CHUNK_CELLS // max(1, n))
        for start in range(0, Gn.support_size, step):
            stop = min(Gn.support_size, start + step)
            questions, weights = _support_chunk(Gn, start, stop)
            wins = coordinate_wins(Gn.base, n, questions, _answers(s, questions))
            per += (wins * weights[:, None]).sum(axis=0)
            hist += _weighted_bincount(wins.sum(axis=1), weights, n + 1)
        den = Gn.denominator
        per_coordinate = [Fraction(int(v), den) for v in per]
        won = [Fraction(int(v), den) for v in hist]
        return WinProfile(per_coordinate, won[n], won, 'exact', 0)
    if seed is None:
        raise RejectedInputError("sampled evaluation needs an explicit seed")
    if samples <= 0:
        raise RejectedInputError("sampled evaluation needs a positive sample count")
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0]))
    wins = sample_wins(Gn, s, samples, rng)
    per = wins.mean(axis=0)
    z = wins.sum(axis=1)
    hist = np.bincount(z, minlength=n + 1) / samples
    overall = float(hist[n])
    stderr = np.sqrt(per * (1 - per) / samples).tolist()
    return WinProfile(per.tolist(), overall, hist.tolist(), 'sampled', samples, stderr,
                      math.sqrt(overall * (1 - overall) / samples))


def _weighted_bincount(values, weights, length):
    out = np.zeros(length, dtype=np.int64)
    np.add.at(out, values, weights)
    return out


def sample_questions(Gn, count, rng):
    base = Gn.base
    probs = base.weights / base.denominator
    combo = rng.choice(len(base.support), size=(count, Gn.n), p=probs)
    questions = []
    for p in range(3):
        digits = base.support[combo, p]
        radix = base.question_sizes[p]
        powers = radix ** np.arange(Gn.n, dtype=np.int64)
        questions.append((digits * powers[None, :]).sum(axis=1))
    return questions


def sample_wins(Gn, s, count, rng):
    """Matriz (count, n) de victorias por coordenada sobre entradas de Q^n muestreadas."""
    out = []
    step = max(1, CHUNK_CELLS // max(1, Gn.n))
    done = 0
    while done < count:
        m = min(step, count - done)
        questions = sample_questions(Gn, m, rng)
        out.append(coordinate_wins(Gn.base, Gn.n, questions, _answers(s, questions)))
        done += m
    return np.concatenate(out) if out else np.zeros((0, Gn.n), dtype=bool)
