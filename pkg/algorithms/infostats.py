"""
Entropias y marginales condicionales de ternas (x, y, w), y cotas de cola de referencia.
Las entropias son flotantes en bits (0 log 0 = 0); las distancias l1 son exactas.
"""
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, NamedTuple, Optional

import numpy as np
import pandas as pd

from libs.config import CHUNK_CELLS, MAX_NAIVE_TRIPLES
from libs.errors import BudgetExceededError, ConditioningError, RejectedInputError
from libs.f2core import F2Set, FiniteDistribution, coordinate_bits

logger = logging.getLogger(__name__)


def entropy(dist):
    """H en bits de una FiniteDistribution o de un vector de probabilidades."""
    if isinstance(dist, FiniteDistribution):
        p = dist.as_float().to_numpy()
    else:
        p = np.asarray(dist, dtype=float)
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


def binary_entropy(p):
    p = float(p)
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return float(-p * math.log2(p) - (1 - p) * math.log2(1 - p))


def binary_entropy_gap(p):
    """
    Ambos lados de |p - 1/2|^2 <= 1 - H(p).

    Retorna:
      (lhs, rhs): lhs exacto si p es Fraction, rhs flotante.
    """
    if not 0 <= p <= 1:
        raise RejectedInputError(f"p={p} outside [0, 1]")
    half = Fraction(1, 2) if isinstance(p, (int, Fraction)) else 0.5
    lhs = (p - half) ** 2
    return lhs, 1.0 - binary_entropy(p)


def _binary_entropy_array(p):
    p = np.asarray(p, dtype=float)
    out = np.zeros_like(p)
    inside = (p > 0) & (p < 1)
    q = p[inside]
    out[inside] = -q * np.log2(q) - (1 - q) * np.log2(1 - q)
    return out


class TripleCounts:
    """
    Agregados de un conjunto T de ternas (x, y, w) en (F_2^n)^3 con distribucion uniforme:
    para cada par (x, y) presente, cuantas w tiene y cuantas con w_i = 1.
    """

    def __init__(self, ambient_dim, pair_keys, pair_counts, coordinate_counts):
        self.ambient_dim = ambient_dim
        keep = np.asarray(pair_counts) > 0
        self.pair_keys = np.asarray(pair_keys, dtype=np.int64)[keep]
        self.pair_counts = np.asarray(pair_counts, dtype=np.int64)[keep]
        self.coordinate_counts = np.asarray(coordinate_counts, dtype=np.int64)[keep]
        self.total = int(self.pair_counts.sum())
        if self.total == 0:
            raise ConditioningError("the triple set T is empty")

    def __len__(self):
        return self.total

    @property
    def coordinate_mass(self):
        return self.coordinate_counts.sum(axis=0)

    @classmethod
    def from_triples(cls, triples, n):
        triples = np.asarray(triples, dtype=np.int64).reshape(-1, 3)
        if triples.size == 0:
            raise ConditioningError("the triple set T is empty")
        triples = np.unique(triples, axis=0)
        pairs = (triples[:, 0] << n) | triples[:, 1]
        keys, inverse = np.unique(pairs, return_inverse=True)
        counts = np.bincount(inverse, minlength=keys.size)
        bits = coordinate_bits(n)[triples[:, 2]].astype(np.int64)
        coordinate_counts = np.zeros((keys.size, n), dtype=np.int64)
        np.add.at(coordinate_counts, inverse, bits)
        return cls(n, keys, counts, coordinate_counts)

    @classmethod
    def from_membership(cls, n, membership):
        """`membership` indexado por (x << 2n) | (y << n) | w."""
        if (1 << (3 * n)) > MAX_NAIVE_TRIPLES:
            raise BudgetExceededError("triple cube (F_2^n)^3", 1 << (3 * n), MAX_NAIVE_TRIPLES)
        grid = np.asarray(membership, dtype=bool).reshape(1 << (2 * n), 1 << n)
        bits = coordinate_bits(n).astype(np.float32)
        counts = grid.sum(axis=1)
        coordinate_counts = np.zeros((grid.shape[0], n), dtype=np.int64)
        step = max(1, CHUNK_CELLS >> n)
        for start in range(0, grid.shape[0], step):
            block = grid[start:start + step].astype(np.float32)
            coordinate_counts[start:start + step] = np.rint(block @ bits).astype(np.int64)
        return cls(n, np.arange(grid.shape[0], dtype=np.int64), counts, coordinate_counts)

    @classmethod
    def full_cube(cls, n):
        return cls.from_membership(n, np.ones(1 << (3 * n), dtype=bool))

    @classmethod
    def random_subset(cls, n, density, rng):
        """Subconjunto uniforme de tamano exacto round(density * 2^{3n})."""
        return cls.from_membership(n, F2Set.random(3 * n, density, rng).membership)

    @classmethod
    def from_square_set(cls, T):
        return cls(T.ambient_dim, T.keys, T.pair_counts, T.coordinate_counts)


def _as_counts(T, n=None):
    if isinstance(T, TripleCounts):
        return T
    if hasattr(T, 'coordinate_counts') and hasattr(T, 'keys'):
        return TripleCounts.from_square_set(T)
    if n is None:
        raise RejectedInputError("explicit triples need the ambient dimension n")
    return TripleCounts.from_triples(T, n)


class MarginalReport(NamedTuple):
    table: pd.DataFrame
    mean: Optional[Fraction]
    zero_mass: List[int]

    def to_dict(self):
        return {'mean': None if self.mean is None else str(self.mean),
                'mean_float': None if self.mean is None else float(self.mean),
                'zero_mass': self.zero_mass, 'table': self.table}


def conditional_marginal_report(T, n=None):
    """
    ||P_{X,Y | W_i = 1} - P_{X,Y}||_1 exacto para cada i con masa positiva, y su media.
    Las coordenadas con Pr[W_i = 1] = 0 se listan en `zero_mass` y no entran en la media.
    """
    T = _as_counts(T, n)
    total = T.total
    rows = []
    zero = []
    for i in range(T.ambient_dim):
        mass = int(T.coordinate_counts[:, i].sum())
        if mass == 0:
            zero.append(i)
            continue
        diff = np.abs(T.coordinate_counts[:, i].astype(object) * total
                      - T.pair_counts.astype(object) * mass)
        l1 = Fraction(int(diff.sum()), total * mass)
        rows.append({'coordinate': i, 'mass': Fraction(mass, total), 'l1': l1, 'l1_float': float(l1)})
    table = pd.DataFrame(rows, columns=['coordinate', 'mass', 'l1', 'l1_float'])
    mean = sum(table['l1'], Fraction(0)) / len(table) if len(table) else None
    if zero:
        logger.warning(f"coordinates with Pr[W_i = 1] = 0 left out of the mean: {zero}")
    return MarginalReport(table, mean, zero)


@dataclass
class EntropyReport:
    ambient_dim: int
    size: int
    entropy_xy: float
    entropy_w_given_xy: float
    coordinate_entropies: List[float]
    deficit: float
    high_entropy: List[int]
    reference_bound: float
    mean_marginal_distance: Optional[float] = None

    @property
    def entropy(self):
        return self.entropy_xy + self.entropy_w_given_xy

    def to_dict(self):
        return {'n': self.ambient_dim, 'size': self.size, 'entropy': self.entropy,
                'entropy_xy': self.entropy_xy, 'entropy_w_given_xy': self.entropy_w_given_xy,
                'coordinate_entropies': self.coordinate_entropies, 'deficit': self.deficit,
                'high_entropy': self.high_entropy, 'reference_bound': self.reference_bound,
                'mean_marginal_distance': self.mean_marginal_distance}


def entropy_report(T, n=None):
    """
    Para (X, Y, W) uniforme en T: H(X,Y), H(W|X,Y), H(W_i|X,Y), el deficit
    delta = 3 - log2|T| / n, las coordenadas con H(W_i|X,Y) >= 1 - sqrt(delta) y la
    cota de referencia 4 delta^{1/4} + 2 delta^{1/2} para la distancia media.
    """
    T = _as_counts(T, n)
    n = T.ambient_dim
    p = T.pair_counts / T.total
    entropy_xy = entropy(p)
    entropy_w = float((p * np.log2(T.pair_counts)).sum())
    ratios = T.coordinate_counts / T.pair_counts[:, None]
    per = [float((p * _binary_entropy_array(ratios[:, i])).sum()) for i in range(n)]
    deficit = max(0.0, 3.0 - math.log2(T.total) / n)
    high = [i for i, h in enumerate(per) if h >= 1 - math.sqrt(deficit) - 1e-12]
    bound = 4 * deficit ** 0.25 + 2 * deficit ** 0.5
    marginals = conditional_marginal_report(T)
    mean = None if marginals.mean is None else float(marginals.mean)
    logger.info(f"entropy report n={n}: |T|={T.total} deficit={deficit:.4f} high={len(high)}")
    return EntropyReport(n, T.total, entropy_xy, entropy_w, per, deficit, high, bound, mean)


def chernoff_reference(n, mu, delta):
    """(e^{-delta^2 mu n / 2}, e^{-delta^2 mu n / 3}): colas inferior y superior."""
    mu = float(mu)
    delta = float(delta)
    if n <= 0 or not 0 < mu <= 1 or not 0 < delta < 1:
        raise RejectedInputError(f"chernoff reference needs n > 0, mu in (0,1], delta in (0,1); "
                                 f"got n={n}, mu={mu}, delta={delta}")
    exponent = delta * delta * mu * n
    return math.exp(-exponent / 2), math.exp(-exponent / 3)


def uniform_prefix_distance(n, t):
    """||U_[n] - U_{[n] \\ [t]}||_1 = 2t/n."""
    if not 0 <= t < n:
        raise RejectedInputError(f"need 0 <= t < n, got t={t}, n={n}")
    return Fraction(2 * t, n)


def uniform_prefix_pair(n, t):
    """Las dos distribuciones explicitas, para comparar con la distancia generica."""
    if not 0 <= t < n:
        raise RejectedInputError(f"need 0 <= t < n, got t={t}, n={n}")
    return FiniteDistribution.uniform(range(n)), FiniteDistribution.uniform(range(t, n))


def wilson_interval(k, trials, z=1.96):
    if trials <= 0 or not 0 <= k <= trials:
        raise RejectedInputError(f"invalid binomial counts k={k}, trials={trials}")
    phat = k / trials
    denom = 1 + z * z / trials
    centre = (phat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


class TailEstimate(NamedTuple):
    frequency: float
    stderr: float
    hits: int
    trials: int
    bound: float


def empirical_tail(n, mu, delta, trials, seed):
    """Frecuencia de Bin(n, mu) >= (1 + delta) mu n en `trials` corridas con semilla."""
    if seed is None:
        raise RejectedInputError("missing --seed: empirical tails need a seed")
    _, upper = chernoff_reference(n, mu, delta)
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0]))
    draws = rng.binomial(n, float(mu), size=trials)
    threshold = (1 + float(delta)) * float(mu) * n
    hits = int((draws >= threshold - 1e-9).sum())
    freq = hits / trials
    return TailEstimate(freq, math.sqrt(freq * (1 - freq) / trials), hits, trials, upper)
