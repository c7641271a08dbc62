"""
Algebraic spreadness, combinatorial spreadness and lower-bounded left-marginals.

Every check works on exact integer counts: a subspace of codimension c inside V
holding `count` of the m points of A is a violation when

    count * 2^c * den > (den + num) * m        with epsilon = num / den

which is the inequality |A ∩ V'| / |V'| > (1 + epsilon) |A| / |V| cleared of fractions.
"""
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, NamedTuple, Optional

import numpy as np

from libs.config import (CHUNK_CELLS, MAX_CONSTRAINT_SYSTEMS, MAX_PARITY_TABLE,
                         MAX_RECTANGLE_SIDE)
from libs.errors import BudgetExceededError, RejectedInputError
from libs.f2core import (AffineSubspace, F2Set, constraints_to_subspace, echelonize,
                         gaussian_binomial, parity, rref_constraint_systems)

logger = logging.getLogger(__name__)

SAMPLED_ADVICE = "use mode sampled:COUNT:SEED"


@dataclass(frozen=True)
class SpreadParams:
    r: int
    epsilon: Fraction
    mode: str = 'exact'
    sample_count: int = 0
    seed: Optional[int] = None

    def __post_init__(self):
        eps = Fraction(self.epsilon).limit_denominator(1 << 20) \
            if isinstance(self.epsilon, float) else Fraction(self.epsilon)
        if not 0 < eps < 1:
            raise RejectedInputError(f"epsilon {eps} outside (0, 1)")
        if int(self.r) < 0:
            raise RejectedInputError(f"r = {self.r} must be nonnegative")
        if self.mode not in ('exact', 'sampled'):
            raise RejectedInputError(f"unknown mode {self.mode!r}")
        if self.mode == 'sampled' and (self.seed is None or self.sample_count <= 0):
            raise RejectedInputError("sampled mode needs a positive sample count and an explicit seed")
        object.__setattr__(self, 'epsilon', eps)
        object.__setattr__(self, 'r', int(self.r))

    @classmethod
    def parse_mode(cls, r, epsilon, text):
        """'exact' o 'sampled:COUNT:SEED'."""
        parts = str(text).split(':')
        if parts[0] == 'exact' and len(parts) == 1:
            return cls(r, epsilon)
        if parts[0] == 'sampled':
            if len(parts) != 3 or not parts[2]:
                raise RejectedInputError("--mode sampled needs COUNT and SEED: sampled:COUNT:SEED")
            return cls(r, epsilon, 'sampled', int(parts[1]), int(parts[2]))
        raise RejectedInputError(f"--mode must be exact or sampled:COUNT:SEED, got {text!r}")


@dataclass(frozen=True)
class Rectangle:
    rows: tuple
    cols: tuple


@dataclass
class SpreadVerdict:
    """
    Resultado de un chequeo.

    `witness` es un AffineSubspace (algebraico), un Rectangle (combinatorio) o la
    tupla de filas bajas (marginales); solo existe si el chequeo fallo.
    """
    passed: bool
    observed_ratio: Fraction
    witness: Optional[object] = None
    coverage: str = 'exact'
    examined: int = 0
    skipped_codims: List[int] = field(default_factory=list)

    def to_dict(self):
        witness = self.witness
        if isinstance(witness, AffineSubspace):
            witness = witness.to_json()
        elif isinstance(witness, Rectangle):
            witness = {"rows": list(witness.rows), "cols": list(witness.cols)}
        elif witness is not None:
            witness = list(witness)
        return {
            "passed": self.passed,
            "ratio": str(self.observed_ratio),
            "ratio_float": float(self.observed_ratio),
            "witness": witness,
            "coverage": self.coverage,
            "examined": self.examined,
            "skipped_codims": list(self.skipped_codims),
        }


class BipartiteRelation:
    """f: X x Y -> {0,1} como matriz booleana con etiquetas de filas y columnas."""

    def __init__(self, table, row_labels=None, col_labels=None):
        table = np.array(table, dtype=bool, copy=True)
        if table.ndim != 2:
            raise RejectedInputError("relation table must be two-dimensional")
        table.setflags(write=False)
        self.table = table
        self.left_size, self.right_size = table.shape
        self.row_labels = (np.arange(self.left_size) if row_labels is None
                           else np.asarray(row_labels))
        self.col_labels = (np.arange(self.right_size) if col_labels is None
                           else np.asarray(col_labels))
        self.ones = int(np.count_nonzero(table))
        cells = self.left_size * self.right_size
        self.mean = Fraction(self.ones, cells) if cells else Fraction(0)


# Algebraic spreadness -------------------------------------------------------

class _CodimScan(NamedTuple):
    best: int
    candidates: list
    examined: int


def _violates(count, c, m, eps):
    return count * (1 << c) * eps.denominator > (eps.denominator + eps.numerator) * m


def _scan_codim_one(pts, d, eps):
    m = pts.size
    masks = np.arange(1, 1 << d, dtype=np.int64)
    ones = np.empty(masks.size, dtype=np.int64)
    step = max(1, CHUNK_CELLS // max(1, m))
    for start in range(0, masks.size, step):
        block = masks[start:start + step]
        ones[start:start + step] = parity(pts[:, None] & block[None, :]).sum(axis=0)
    zeros = m - ones
    best = int(max(ones.max(), zeros.max()))
    candidates = []
    if _violates(best, 1, m, eps):
        candidates += [((int(mask),), 1) for mask in masks[ones == best]]
        candidates += [((int(mask),), 0) for mask in masks[zeros == best]]
    return _CodimScan(best, candidates, 2 * masks.size)


def _scan_codim_two(pts, d, eps):
    """Cuenta todos los pares de hiperplanos con un producto de matrices de paridad."""
    m = pts.size
    masks = np.arange(1, 1 << d, dtype=np.int64)
    P = parity(pts[:, None] & masks[None, :]).astype(np.float32)
    c1 = P.sum(axis=0)
    c11 = P.T @ P
    upper = np.triu(np.ones((masks.size, masks.size), dtype=bool), k=1)
    counts = {
        3: c11,
        1: c1[:, None] - c11,
        2: c1[None, :] - c11,
        0: m - c1[:, None] - c1[None, :] + c11,
    }
    best = int(max(np.rint(arr[upper]).max() for arr in counts.values()))
    candidates = []
    if _violates(best, 2, m, eps):
        for syndrome, arr in counts.items():
            ii, jj = np.nonzero(upper & (np.rint(arr) == best))
            candidates += [((int(masks[i]), int(masks[j])), syndrome) for i, j in zip(ii, jj)]
    examined = 4 * int(upper.sum())
    return _CodimScan(best, candidates, examined)


def _scan_codim_general(pts, d, c, eps):
    m = pts.size
    best = -1
    candidates = []
    examined = 0
    for rows in rref_constraint_systems(d, c):
        syndrome = np.zeros(m, dtype=np.int64)
        for j, row in enumerate(rows):
            syndrome |= parity(pts & row) << j
        counts = np.bincount(syndrome, minlength=1 << c)
        examined += counts.size
        top = int(counts.max())
        if top > best:
            best = top
            candidates = []
        if top == best and _violates(best, c, m, eps):
            candidates += [(rows, int(s)) for s in np.flatnonzero(counts == best)]
    return _CodimScan(best, candidates, examined)


def _codim_cost(d, c, m):
    """(sistemas a recorrer en Python, celdas de tabla de paridad)."""
    if c == 1:
        return 0, m
    if c == 2 and (1 << (2 * d)) <= MAX_PARITY_TABLE and m * (1 << d) <= MAX_PARITY_TABLE:
        return 0, m * (1 << d)
    return gaussian_binomial(d, c), 0


def _scan_codim(pts, d, c, eps):
    if c == 1:
        return _scan_codim_one(pts, d, eps)
    systems, _ = _codim_cost(d, c, pts.size)
    if c == 2 and systems == 0:
        return _scan_codim_two(pts, d, eps)
    return _scan_codim_general(pts, d, c, eps)


def _pick_witness(V, candidates):
    best = None
    for rows, syndrome in candidates:
        sub = constraints_to_subspace(V, rows, syndrome)
        if sub is not None and (best is None or sub.sort_key() < best.sort_key()):
            best = sub
    return best


def _closed_form_ratio(d, m):
    # los puntos de A son subespacios de codimension d con densidad local 1
    return Fraction(1 << d, m)


def _check_local(pts, V, r, eps, max_systems=MAX_CONSTRAINT_SYSTEMS):
    """
    Chequeo exacto sobre coordenadas locales `pts` (enteros de d bits) de A dentro de V.
    Busca codimensiones 1, 2, ... en orden y se detiene en la primera con violaciones.
    """
    d = V.dim
    m = pts.size
    top = min(r, d)
    if m == (1 << d):
        return SpreadVerdict(True, Fraction(1), examined=0)

    closed_form = r >= d
    if closed_form:
        ratio = _closed_form_ratio(d, m)
        if not _violates(1, d, m, eps):
            return SpreadVerdict(True, ratio, examined=m)

    best_ratio = Fraction(1)
    examined = 0
    skipped = []
    for c in range(1, top + 1):
        if c == d:
            # subespacios de un solo punto: el testigo canonico es el menor punto de A
            ratio = _closed_form_ratio(d, m)
            if _violates(1, d, m, eps):
                witness = AffineSubspace.point(V.ambient_dim, int(V.from_local(pts).min()))
                return SpreadVerdict(False, max(best_ratio, ratio), witness,
                                     examined=examined + m, skipped_codims=skipped)
            best_ratio = max(best_ratio, ratio)
            continue
        systems, _ = _codim_cost(d, c, m)
        if systems > max_systems:
            if closed_form:
                logger.warning(f"codim {c} skipped: {systems} constraint systems over budget")
                skipped.append(c)
                continue
            raise BudgetExceededError(
                f"exact spreadness at codimension {c} inside a {d}-dim space",
                systems, max_systems, advice=SAMPLED_ADVICE)
        scan = _scan_codim(pts, d, c, eps)
        examined += scan.examined
        ratio = Fraction(scan.best << c, m)
        best_ratio = max(best_ratio, ratio)
        if scan.candidates:
            witness = _pick_witness(V, scan.candidates)
            return SpreadVerdict(False, best_ratio, witness, examined=examined,
                                 skipped_codims=skipped)
    if closed_form:
        best_ratio = _closed_form_ratio(d, m)
    return SpreadVerdict(True, best_ratio, examined=examined, skipped_codims=skipped)


def _random_constraint_rows(rng, d, c):
    while True:
        rows = [int(v) for v in rng.integers(1, 1 << d, size=c)]
        _, dependent = echelonize(rows)
        if not dependent:
            return rows


def _check_local_sampled(pts, V, r, eps, sample_count, seed):
    """Restricciones aleatorias: un fallo es certificado, un pase es probabilistico."""
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0]))
    d = V.dim
    m = pts.size
    top = min(r, d)
    best_ratio = Fraction(1)
    witness = None
    witness_codim = None
    examined = 0
    if top == 0 or m == (1 << d):
        return SpreadVerdict(True, Fraction(1), coverage='sampled')
    for _ in range(sample_count):
        c = int(rng.integers(1, top + 1))
        rows = _random_constraint_rows(rng, d, c)
        syndrome = np.zeros(m, dtype=np.int64)
        for j, row in enumerate(rows):
            syndrome |= parity(pts & row) << j
        counts = np.bincount(syndrome, minlength=1 << c)
        examined += counts.size
        s = int(np.argmax(counts))
        ratio = Fraction(int(counts[s]) << c, m)
        if ratio > best_ratio:
            best_ratio = ratio
            if _violates(int(counts[s]), c, m, eps) and (witness_codim is None or c <= witness_codim):
                witness = constraints_to_subspace(V, rows, s)
                witness_codim = c
    return SpreadVerdict(witness is None, best_ratio, witness, coverage='sampled',
                         examined=examined)


def _local_points(A, V):
    if A.ambient_dim != V.ambient_dim:
        raise RejectedInputError(f"dimension mismatch: {A.ambient_dim} vs {V.ambient_dim}")
    if A.size == 0:
        raise RejectedInputError("spreadness is undefined for the empty set")
    members = A.members
    if not np.all(V.contains_array(members)):
        raise RejectedInputError("set is not contained in the subspace")
    return V.to_local(members)


def check_algebraic_spread(A, V, p):
    """
    Decide si A es (r, epsilon)-algebraicamente disperso dentro de V: ningun subespacio
    afin de codimension <= r dentro de V tiene densidad local mayor a (1+epsilon) veces
    la densidad global (igualdad permitida).
    """
    pts = _local_points(A, V)
    if p.mode == 'sampled':
        verdict = _check_local_sampled(pts, V, p.r, p.epsilon, p.sample_count, p.seed)
    else:
        verdict = _check_local(pts, V, p.r, p.epsilon)
    logger.debug(f"spread check |A|={A.size} dim={V.dim} r={p.r} eps={p.epsilon}: "
                 f"passed={verdict.passed} ratio={verdict.observed_ratio}")
    return verdict


def certify_points(members, V, r, epsilon):
    """Chequeo exacto sobre un arreglo de miembros (sin construir el bitset)."""
    members = np.asarray(members, dtype=np.int64)
    if members.size == 0:
        raise RejectedInputError("spreadness is undefined for the empty set")
    return _check_local(V.to_local(members), V, r, Fraction(epsilon))


class IterationRecord(NamedTuple):
    step: int
    codim: int
    dim: int
    size: int
    density: Fraction
    gain: Fraction


class SpreadSubset(NamedTuple):
    space: AffineSubspace
    subset: F2Set
    log: list


def extract_points(members, V, r, epsilon):
    """
    Incremento de densidad: mientras el conjunto no sea disperso, pasar al subespacio
    testigo. Retorna (subespacio, miembros, log, veredicto final).
    """
    epsilon = Fraction(epsilon)
    members = np.asarray(members, dtype=np.int64)
    space = V
    current = Fraction(members.size, space.size)
    log = []
    while True:
        verdict = _check_local(space.to_local(members), space, r, epsilon)
        if verdict.passed:
            return space, members, log, verdict
        witness = verdict.witness
        members = members[witness.contains_array(members)]
        new_density = Fraction(members.size, witness.size)
        gain = new_density / current
        log.append(IterationRecord(len(log) + 1, space.dim - witness.dim, witness.dim,
                                   int(members.size), new_density, gain))
        logger.debug(f"density increment {len(log)}: dim {space.dim} -> {witness.dim}, "
                     f"density {current} -> {new_density}")
        space = witness
        current = new_density


def extract_spread_subset(X, V, r, epsilon):
    """
    Subconjunto disperso X' = X ∩ V' con densidad >= la de X; cada paso del log gana
    un factor mayor a (1 + epsilon).
    """
    _local_points(X, V)
    space, members, log, _ = extract_points(X.members, V, r, epsilon)
    return SpreadSubset(space, F2Set.from_members(X.ambient_dim, members), log)


def max_density_increments(density, epsilon):
    """ceil(epsilon^-1 log2(1/density)), la cota de terminacion del incremento de densidad."""
    density = Fraction(density)
    epsilon = Fraction(epsilon)
    if density >= 1:
        return 0
    return math.ceil(math.log2(density.denominator / density.numerator) / float(epsilon) - 1e-12)


# Combinatorial spreadness -----------------------------------------------------

def _best_rectangles_for_rows(f, row_masks_matrix, sizes, r, eps):
    """
    Para cada conjunto de filas S (filas de la matriz 0/1) el mejor T es el de las
    columnas con mayor suma restringida; retorna (mejor razon, S, t).
    """
    total = f.left_size * f.right_size
    col_sums = row_masks_matrix @ f.table.astype(np.int64)
    order = np.argsort(-col_sums, axis=1, kind='stable')
    sorted_sums = np.take_along_axis(col_sums, order, axis=1)
    cums = np.cumsum(sorted_sums, axis=1)
    t = np.arange(1, f.right_size + 1, dtype=np.int64)
    s = sizes[:, None]
    allowed = (s * t[None, :]) << r >= total
    allowed &= s >= 1
    # razon = cums * |X||Y| / (ones * s * t)
    lhs = cums * total
    rhs = f.ones * s * t[None, :]
    score = np.where(allowed, lhs / np.maximum(rhs, 1), -1.0)
    top = float(score.max())
    if top < 0:
        return None
    # el flotante solo preselecciona; el maximo se decide con la razon exacta
    best = None
    near = np.flatnonzero(score.ravel() >= top * (1 - 1e-9))
    for k in (near[:1] if top == 0 else near):
        i, j = divmod(int(k), f.right_size)
        ratio = Fraction(int(cums[i, j]) * total, f.ones * int(sizes[i]) * (j + 1))
        if best is None or ratio > best[0]:
            best = (ratio, i, j)
    ratio, i, j = best
    return ratio, i, order[i, :j + 1]


def _rectangle_verdict(best, f, eps, coverage, examined):
    if best is None:
        return SpreadVerdict(True, Fraction(0), coverage=coverage, examined=examined)
    ratio, rows, cols = best
    passed = ratio <= 1 + eps
    witness = None if passed else Rectangle(tuple(int(v) for v in rows),
                                            tuple(int(v) for v in sorted(cols)))
    return SpreadVerdict(passed, ratio, witness, coverage=coverage, examined=examined)


def _check_combinatorial_exact(f, r, eps):
    transposed = f.left_size > f.right_size
    g = BipartiteRelation(f.table.T) if transposed else f
    k = g.left_size
    if k > MAX_RECTANGLE_SIDE:
        raise BudgetExceededError("exact combinatorial spreadness", f"2^{k} row subsets",
                                  f"2^{MAX_RECTANGLE_SIDE}", advice=SAMPLED_ADVICE)
    best = None
    step = max(1, CHUNK_CELLS // max(1, g.right_size))
    subsets = np.arange(1, 1 << k, dtype=np.int64)
    for start in range(0, subsets.size, step):
        block = subsets[start:start + step]
        masks = ((block[:, None] >> np.arange(k)[None, :]) & 1).astype(np.int64)
        found = _best_rectangles_for_rows(g, masks, masks.sum(axis=1), r, eps)
        if found is not None and (best is None or found[0] > best[0]):
            ratio, i, cols = found
            best = (ratio, np.flatnonzero(masks[i]), cols)
    if best is not None and transposed:
        ratio, rows, cols = best
        best = (ratio, cols, rows)
    return _rectangle_verdict(best, f, eps, 'exact', int(subsets.size))


def _check_combinatorial_sampled(f, r, eps, sample_count, seed):
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0]))
    total = f.left_size * f.right_size
    min_rows = max(1, -(-total // (f.right_size << r)))
    best = None
    step = max(1, CHUNK_CELLS // max(1, f.right_size * f.left_size))
    done = 0
    while done < sample_count:
        batch = min(step, sample_count - done)
        sizes = rng.integers(min_rows, f.left_size + 1, size=batch)
        keys = rng.random((batch, f.left_size))
        ranks = np.argsort(np.argsort(keys, axis=1), axis=1)
        masks = (ranks < sizes[:, None]).astype(np.int64)
        found = _best_rectangles_for_rows(f, masks, sizes.astype(np.int64), r, eps)
        if found is not None and (best is None or found[0] > best[0]):
            ratio, i, cols = found
            best = (ratio, np.flatnonzero(masks[i]), cols)
        done += batch
    return _rectangle_verdict(best, f, eps, 'sampled', sample_count)


def check_combinatorial_spread(f, r, epsilon, mode='exact', sample_count=0, seed=None):
    """
    (r, epsilon)-combinatorial spreadness: para todo S x T no vacio con
    |S x T| >= 2^-r |X x Y|, la media de f en S x T es <= (1+epsilon) E[f].
    """
    eps = Fraction(epsilon)
    if f.mean <= 0:
        raise RejectedInputError("combinatorial spreadness needs E[f] > 0")
    if mode == 'sampled':
        if seed is None or sample_count <= 0:
            raise RejectedInputError("sampled mode needs a positive sample count and an explicit seed")
        return _check_combinatorial_sampled(f, int(r), eps, int(sample_count), seed)
    return _check_combinatorial_exact(f, int(r), eps)


def check_combinatorial_spread_bruteforce(f, r, epsilon):
    """Todas las 2^{|X|+|Y|} parejas (S, T); solo para validar la reduccion."""
    eps = Fraction(epsilon)
    total = f.left_size * f.right_size
    table = f.table.astype(np.int64)
    best = None
    for smask in range(1, 1 << f.left_size):
        rows = [i for i in range(f.left_size) if (smask >> i) & 1]
        col_sums = table[rows].sum(axis=0)
        for tmask in range(1, 1 << f.right_size):
            cols = [j for j in range(f.right_size) if (tmask >> j) & 1]
            if (len(rows) * len(cols)) << r < total:
                continue
            ratio = Fraction(int(col_sums[cols].sum()) * total, f.ones * len(rows) * len(cols))
            if best is None or ratio > best[0]:
                best = (ratio, rows, cols)
    return _rectangle_verdict(best, f, eps, 'exact', 0)


def check_left_marginals(f, r, epsilon):
    """
    Lower-bounded left-marginals: Pr_x[E_y f(x,y) <= (1-epsilon) E f] <= 2^-r.
    observed_ratio es la fraccion de filas bajas; el testigo son esas filas.
    """
    eps = Fraction(epsilon)
    if f.mean <= 0:
        raise RejectedInputError("left marginals need E[f] > 0")
    row_sums = f.table.sum(axis=1).astype(object)
    # row_sum / |Y| <= (1 - eps) * ones / (|X||Y|)
    low = [i for i, s in enumerate(row_sums)
           if s * f.left_size * eps.denominator <= (eps.denominator - eps.numerator) * f.ones]
    fraction = Fraction(len(low), f.left_size)
    passed = (len(low) << int(r)) <= f.left_size
    witness = None if passed else tuple(low)
    return SpreadVerdict(passed, fraction, witness, examined=f.left_size)


def sum_set_relation(X, Y, Z):
    """f(x, y) = 1[x + y in Z] sobre X x Y."""
    if X.size == 0 or Y.size == 0:
        raise RejectedInputError("sum-set relation needs nonempty X and Y")
    for s in (Y, Z):
        if s.ambient_dim != X.ambient_dim:
            raise RejectedInputError("dimension mismatch")
    xs = X.members
    ys = Y.members
    table = Z.membership[xs[:, None] ^ ys[None, :]]
    return BipartiteRelation(table, xs, ys)
