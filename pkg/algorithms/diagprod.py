"""
Conjuntos diagonales S(X,Y,Z), cuadrados, la familia T de cuadrados y la
distribucion mu de cubrimiento por cuadrados.

Un par (x, y) se guarda como la clave entera (x << n) | y. Las distribuciones
sobre S usan esas claves como puntos del soporte.
"""
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, NamedTuple, Optional

import numpy as np
import pandas as pd

from libs.config import CHUNK_CELLS, MAX_NAIVE_TRIPLES, MAX_PAIRS, MAX_TRIPLES
from libs.errors import (BudgetExceededError, ConditioningError, NoSquaresError,
                         RejectedInputError)
from libs.f2core import FiniteDistribution, coordinate_bits, popcount

logger = logging.getLogger(__name__)


def pair_key(x, y, n):
    return (int(x) << n) | int(y)


class DiagonalProduct:
    """S(X,Y,Z) = {(x, y) : x in X, y in Y, x + y in Z} como claves ordenadas."""

    def __init__(self, X, Y, Z, keys):
        self.X = X
        self.Y = Y
        self.Z = Z
        self.ambient_dim = X.ambient_dim
        self.keys = keys
        self.size = int(keys.size)
        self._mask = (1 << self.ambient_dim) - 1

    @property
    def xs(self):
        return self.keys >> self.ambient_dim

    @property
    def ys(self):
        return self.keys & self._mask

    def __len__(self):
        return self.size

    def __contains__(self, pair):
        x, y = pair
        return bool(self.X.membership[x] and self.Y.membership[y] and self.Z.membership[x ^ y])

    def contains_arrays(self, xs, ys):
        return self.X.membership[xs] & self.Y.membership[ys] & self.Z.membership[xs ^ ys]

    def pairs(self):
        return list(zip(self.xs.tolist(), self.ys.tolist()))


def build_diagonal_product(X, Y, Z, max_pairs=MAX_PAIRS):
    n = X.ambient_dim
    if Y.ambient_dim != n or Z.ambient_dim != n:
        raise RejectedInputError(f"dimension mismatch: {n}, {Y.ambient_dim}, {Z.ambient_dim}")
    work = X.size * Y.size
    if work > max_pairs:
        raise BudgetExceededError("building S(X,Y,Z)", work, max_pairs,
                                  advice="lower n or raise --max_pairs")
    xs = X.members
    ys = Y.members
    blocks = []
    if xs.size and ys.size:
        step = max(1, CHUNK_CELLS // ys.size)
        for start in range(0, xs.size, step):
            bx = xs[start:start + step]
            hit = Z.membership[bx[:, None] ^ ys[None, :]]
            rows, cols = np.nonzero(hit)
            blocks.append((bx[rows] << n) | ys[cols])
    keys = np.concatenate(blocks) if blocks else np.zeros(0, dtype=np.int64)
    keys = np.sort(keys.astype(np.int64))
    keys.setflags(write=False)
    logger.debug(f"S(X,Y,Z): |X|={X.size} |Y|={Y.size} |Z|={Z.size} -> |S|={keys.size}")
    return DiagonalProduct(X, Y, Z, keys)


@dataclass(frozen=True)
class Square:
    """s_{x,y,w} = {(x,y), (x+w,y), (x,y+w), (x+w,y+w)}."""
    x: int
    y: int
    w: int
    ambient_dim: int

    def representations(self):
        x, y, w = self.x, self.y, self.w
        return [(x, y), (x ^ w, y), (x, y ^ w), (x ^ w, y ^ w)]

    def canonical(self):
        x, y = min(self.representations())
        return Square(x, y, self.w, self.ambient_dim)

    def points(self):
        return self.representations()

    def point_set(self):
        return frozenset(self.representations())

    def nontrivial_coordinates(self):
        return [i for i in range(self.ambient_dim) if (self.w >> i) & 1]


class SquareSet:
    """
    La familia T: todas las ternas (x, y, w) con s_{x,y,w} contenido en S, sin
    canonizar (cada cuadrado con w != 0 aparece 4 veces).

    Se guardan los agregados del barrido: cuantas w tiene cada par, cuantas
    veces aparece cada w, y cuantas w con w_i = 1 tiene cada par.
    """

    def __init__(self, product, pair_counts, w_counts, coordinate_counts):
        self.product = product
        self.ambient_dim = product.ambient_dim
        self.keys = product.keys
        self.pair_counts = pair_counts
        self.w_counts = w_counts
        self.coordinate_counts = coordinate_counts
        self.count = int(pair_counts.sum(dtype=np.int64))
        self.coordinate_mass = coordinate_counts.sum(axis=0, dtype=np.int64)

    def __len__(self):
        return self.count

    def _blocks(self):
        n = self.ambient_dim
        S = self.product
        idx = np.arange(1 << n, dtype=np.int64)
        step = max(1, CHUNK_CELLS >> n)
        xs = S.xs
        ys = S.ys
        for start in range(0, S.size, step):
            bx = xs[start:start + step]
            by = ys[start:start + step]
            yield start, bx, by, _square_mask(S, bx, by, idx)

    def triples(self, limit=MAX_NAIVE_TRIPLES):
        """Arreglo (|T|, 3) de ternas (x, y, w) en orden lexicografico."""
        if self.count > limit:
            raise BudgetExceededError("materializing the square family", self.count, limit)
        out = []
        for _, bx, by, M in self._blocks():
            rows, ws = np.nonzero(M)
            out.append(np.stack([bx[rows], by[rows], ws.astype(np.int64)], axis=1))
        if not out:
            return np.zeros((0, 3), dtype=np.int64)
        arr = np.concatenate(out)
        order = np.lexsort((arr[:, 2], arr[:, 1], arr[:, 0]))
        return arr[order]

    def squares(self, limit=MAX_NAIVE_TRIPLES):
        n = self.ambient_dim
        return [Square(int(x), int(y), int(w), n) for x, y, w in self.triples(limit)]


def _square_mask(S, bx, by, idx):
    # s_{x,y,w} en S  <=>  x, x+w en X;  y, y+w en Y;  x+y, x+y+w en Z
    X, Y, Z = S.X.membership, S.Y.membership, S.Z.membership
    return X[bx[:, None] ^ idx] & Y[by[:, None] ^ idx] & Z[(bx ^ by)[:, None] ^ idx]


def _as_product(S):
    return S.product if isinstance(S, SquareSet) else S


def enumerate_squares(S, max_triples=MAX_TRIPLES):
    """
    Barrido optimizado: para cada (x, y) en S se prueban todas las w a la vez con
    el AND de tres bitsets corridos. Costo |S| * 2^n.
    """
    n = S.ambient_dim
    work = S.size << n
    if work > max_triples:
        raise BudgetExceededError("square scan |S| * 2^n", work, max_triples,
                                  advice="lower n or raise --max_triples")
    pair_counts = np.zeros(S.size, dtype=np.int64)
    w_counts = np.zeros(1 << n, dtype=np.int64)
    coordinate_counts = np.zeros((S.size, n), dtype=np.int64)
    wbits = coordinate_bits(n).astype(np.float32)
    idx = np.arange(1 << n, dtype=np.int64)
    step = max(1, CHUNK_CELLS >> n)
    xs, ys = S.xs, S.ys
    for start in range(0, S.size, step):
        M = _square_mask(S, xs[start:start + step], ys[start:start + step], idx)
        stop = start + M.shape[0]
        pair_counts[start:stop] = M.sum(axis=1)
        w_counts += M.sum(axis=0)
        coordinate_counts[start:stop] = np.rint(M.astype(np.float32) @ wbits).astype(np.int64)
    T = SquareSet(S, pair_counts, w_counts, coordinate_counts)
    logger.debug(f"square scan: |S|={S.size} -> |T|={T.count}")
    return T


def enumerate_squares_naive(S, limit=MAX_NAIVE_TRIPLES):
    """Barrido literal sobre todas las ternas (x, y, w) de (F_2^n)^3; ordenado."""
    n = S.ambient_dim
    if (1 << (3 * n)) > limit:
        raise BudgetExceededError("naive 2^{3n} square scan", 1 << (3 * n), limit)
    inside = np.zeros(1 << (2 * n), dtype=bool)
    inside[S.keys] = True
    grid = np.arange(1 << n, dtype=np.int64)
    gx, gy = np.meshgrid(grid, grid, indexing='ij')
    found = []
    for w in range(1 << n):
        ok = (inside[(gx << n) | gy] & inside[((gx ^ w) << n) | gy]
              & inside[(gx << n) | (gy ^ w)] & inside[((gx ^ w) << n) | (gy ^ w)])
        rows, cols = np.nonzero(ok)
        if rows.size:
            found.append(np.stack([rows, cols, np.full(rows.size, w)], axis=1).astype(np.int64))
    if not found:
        return np.zeros((0, 3), dtype=np.int64)
    arr = np.concatenate(found)
    order = np.lexsort((arr[:, 2], arr[:, 1], arr[:, 0]))
    return arr[order]


@dataclass
class SquareCoverProfile:
    """Gamma(x,y) = E_w 1[s_{x,y,w} en S] = pair_counts / 2^n, con sus normas."""
    ambient_dim: int
    keys: np.ndarray
    pair_counts: np.ndarray
    l1: Fraction
    l2sq: Fraction

    def gamma(self, x, y):
        key = pair_key(x, y, self.ambient_dim)
        pos = int(np.searchsorted(self.keys, key))
        if pos < self.keys.size and self.keys[pos] == key:
            return Fraction(int(self.pair_counts[pos]), 1 << self.ambient_dim)
        return Fraction(0)


def gamma_profile(T):
    n = T.ambient_dim
    l1 = Fraction(T.count, 1 << (3 * n))
    squares = sum(int(c) * int(c) for c in T.pair_counts.tolist())
    l2sq = Fraction(squares, 1 << (4 * n))
    return SquareCoverProfile(n, T.keys, T.pair_counts, l1, l2sq)


def _require_squares(T):
    if T.count == 0:
        raise NoSquaresError("S(X,Y,Z) contains no square; treat it as remainder")


def square_cover_distribution(S, max_triples=MAX_TRIPLES):
    """mu[(x,y)] = Gamma(x,y) * 2^n / |T| exacto, sin muestreo."""
    T = S if isinstance(S, SquareSet) else enumerate_squares(S, max_triples)
    _require_squares(T)
    keep = T.pair_counts > 0
    return FiniteDistribution.from_counts(T.keys[keep].tolist(), T.pair_counts[keep].tolist())


def uniform_on_product(S):
    S = _as_product(S)
    if S.size == 0:
        raise ConditioningError("uniform distribution on an empty S")
    return FiniteDistribution.uniform(S.keys.tolist())


def estimate_square_cover(S, samples, rng):
    """
    Estimador por rechazo de mu: (x, y) uniforme en S y w uniforme; se acepta si el
    cuadrado cabe en S y se devuelve un punto uniforme del cuadrado.
    """
    S = _as_product(S)
    if S.size == 0:
        raise NoSquaresError("S(X,Y,Z) is empty")
    n = S.ambient_dim
    picks = rng.integers(0, S.size, size=samples)
    ws = rng.integers(0, 1 << n, size=samples, dtype=np.int64)
    corner = rng.integers(0, 4, size=samples)
    xs = S.xs[picks]
    ys = S.ys[picks]
    ok = S.contains_arrays(xs ^ ws, ys) & S.contains_arrays(xs, ys ^ ws) \
        & S.contains_arrays(xs ^ ws, ys ^ ws)
    if not ok.any():
        raise NoSquaresError(f"no square accepted in {samples} draws")
    px = xs ^ np.where(corner & 1, ws, 0)
    py = ys ^ np.where(corner & 2, ws, 0)
    keys = ((px << n) | py)[ok]
    freq = pd.Series(keys).value_counts().sort_index()
    dist = FiniteDistribution.from_frequencies(freq.index.tolist(), freq.to_numpy())
    return EstimatedCover(dist, int(ok.sum()), int(samples))


class EstimatedCover(NamedTuple):
    distribution: FiniteDistribution
    accepted: int
    drawn: int


def square_embedding(square, i):
    """
    Las cuatro entradas (x_a, y_b, x_a + y_b) del cuadrado, con la representacion
    que cumple x_i = y_i = 0; la coordenada i de cada entrada es (a, b, a+b).
    """
    if not (square.w >> i) & 1:
        raise RejectedInputError(f"coordinate {i} is trivial for this square")
    x = square.x ^ square.w if (square.x >> i) & 1 else square.x
    y = square.y ^ square.w if (square.y >> i) & 1 else square.y
    out = []
    for a in (0, 1):
        for b in (0, 1):
            xa = x ^ (square.w if a else 0)
            yb = y ^ (square.w if b else 0)
            out.append(((a, b, a ^ b), (xa, yb, xa ^ yb)))
    return out


# Distancias ------------------------------------------------------------------

def _aligned(P, Q):
    index = P.weights.index.union(Q.weights.index)
    return (P.weights.reindex(index, fill_value=0),
            Q.weights.reindex(index, fill_value=0))


def l1_distance(P, Q):
    """Suma de |P - Q| sobre la union de soportes; exacta si ambas son exactas."""
    if P.is_exact and Q.is_exact:
        common = P.denominator * Q.denominator // math.gcd(P.denominator, Q.denominator)
        a, b = _aligned(P, Q)
        a = a.map(lambda v: int(v) * (common // P.denominator))
        b = b.map(lambda v: int(v) * (common // Q.denominator))
        total = sum(abs(u - v) for u, v in zip(a.tolist(), b.tolist()))
        return Fraction(total, common)
    index = P.weights.index.union(Q.weights.index)
    a = P.as_float().reindex(index, fill_value=0.0)
    b = Q.as_float().reindex(index, fill_value=0.0)
    return float(np.abs(a.to_numpy() - b.to_numpy()).sum())


def l2_norm_sq(P):
    if P.is_exact:
        return Fraction(sum(int(v) ** 2 for v in P.weights.tolist()), P.denominator ** 2)
    return float((P.as_float() ** 2).sum())


# Reportes --------------------------------------------------------------------

def _relative(value, target):
    if target == 0:
        return None
    return (value - target) / target


def counting_report(X, Y, Z, max_pairs=MAX_PAIRS, max_triples=MAX_TRIPLES):
    """
    Valores exactos y desviaciones relativas de |S| 2^-2n, ||Gamma||_1, ||Gamma||_2^2 y
    |T| 2^-3n frente a sus objetivos alpha, alpha^2, alpha^3, alpha^2
    (alpha = alpha_X alpha_Y alpha_Z).
    """
    n = X.ambient_dim
    S = build_diagonal_product(X, Y, Z, max_pairs)
    T = enumerate_squares(S, max_triples)
    profile = gamma_profile(T)
    alphas = {'X': X.density, 'Y': Y.density, 'Z': Z.density}
    alpha = alphas['X'] * alphas['Y'] * alphas['Z']
    values = {
        'size': Fraction(S.size, 1 << (2 * n)),
        'gamma_l1': profile.l1,
        'gamma_l2sq': profile.l2sq,
        'squares': Fraction(T.count, 1 << (3 * n)),
    }
    targets = {
        'size': alpha,
        'gamma_l1': alpha ** 2,
        'gamma_l2sq': alpha ** 3,
        'squares': alpha ** 2,
    }
    deviations = {k: _relative(values[k], targets[k]) for k in values}
    report = {
        'n': n,
        'sizes': {'X': X.size, 'Y': Y.size, 'Z': Z.size, 'S': S.size, 'T': T.count},
        'alphas': alphas,
        'values': values,
        'targets': targets,
        'deviations': deviations,
        'l1_mu_us': None,
        'mean_nontrivial': None,
        'cauchy_schwarz': None,
    }
    if T.count:
        mu = square_cover_distribution(T)
        l1 = l1_distance(mu, uniform_on_product(S))
        bound = S.size * l2_norm_sq(mu) - 1
        report['l1_mu_us'] = l1
        report['mean_nontrivial'] = nontrivial_coordinate_stats(T).mean
        report['cauchy_schwarz'] = {'lhs': l1 * l1, 'rhs': bound, 'holds': l1 * l1 <= bound}
    logger.info(f"counting report n={n}: |S|={S.size} |T|={T.count} deviations={deviations}")
    return report


class NontrivialStats(NamedTuple):
    mean: Fraction
    histogram: pd.Series


def nontrivial_coordinate_stats(T):
    """E|I_s| exacto para (x,y,w) uniforme en T, e histograma del peso de w."""
    _require_squares(T)
    weights = popcount(np.arange(1 << T.ambient_dim, dtype=np.int64))
    total = sum(int(c) * int(k) for c, k in zip(T.w_counts.tolist(), weights.tolist()))
    mean = Fraction(total, T.count)
    histogram = (pd.Series(T.w_counts, index=pd.Index(weights, name='weight'))
                 .groupby(level=0).sum().rename('triples'))
    return NontrivialStats(mean, histogram)


def conditional_square_distribution(S, i, max_triples=MAX_TRIPLES):
    """nu_i: punto uniforme de s_{x,y,w} con (x,y,w) uniforme en T condicionado a w_i = 1."""
    T = S if isinstance(S, SquareSet) else enumerate_squares(S, max_triples)
    if not 0 <= i < T.ambient_dim:
        raise RejectedInputError(f"coordinate {i} outside [0, {T.ambient_dim})")
    column = T.coordinate_counts[:, i]
    if int(column.sum()) == 0:
        raise ConditioningError(f"no square in S has w_{i} = 1")
    keep = column > 0
    return FiniteDistribution.from_counts(T.keys[keep].tolist(), column[keep].tolist())


class ConditionalDistances(NamedTuple):
    table: pd.DataFrame
    mean: Optional[Fraction]
    zero_mass: List[int]


def conditional_square_distances(T):
    """||mu - nu_i||_1 por coordenada; las coordenadas sin masa se listan aparte."""
    _require_squares(T)
    total = T.count
    rows = []
    zero = []
    counts = T.pair_counts
    for i in range(T.ambient_dim):
        mass = int(T.coordinate_mass[i])
        if mass == 0:
            zero.append(i)
            continue
        diff = np.abs(counts * mass - T.coordinate_counts[:, i] * total)
        l1 = Fraction(int(diff.astype(object).sum()), total * mass)
        rows.append({'coordinate': i, 'mass': mass, 'l1': l1, 'l1_float': float(l1)})
    table = pd.DataFrame(rows, columns=['coordinate', 'mass', 'l1', 'l1_float'])
    mean = sum(table['l1'], Fraction(0)) / len(table) if len(table) else None
    return ConditionalDistances(table, mean, zero)
