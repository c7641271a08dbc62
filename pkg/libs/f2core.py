"""
Algebra lineal y aritmetica de conjuntos sobre F_2^n.

Los vectores se codifican como enteros (bit i = coordenada i), los conjuntos como
bitsets de numpy de largo 2^n y los subespacios afines como offset + base en forma
escalonada reducida (pivote = bit mas alto de cada vector).
"""
import itertools
import json
import logging
import math
import struct
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import pandas as pd

from libs.config import CHUNK_CELLS, MAX_AMBIENT_DIM, MAX_ENUMERATED_SUBSPACES
from libs.errors import BudgetExceededError, RejectedInputError

logger = logging.getLogger(__name__)

_POPCOUNT8 = np.array([bin(i).count('1') for i in range(256)], dtype=np.int64)


def _check_dim(n):
    n = int(n)
    if not 1 <= n <= MAX_AMBIENT_DIM:
        raise RejectedInputError(f"ambient dimension {n} outside [1, {MAX_AMBIENT_DIM}]")
    return n


def parity(values):
    """Paridad de cada entero (hasta 32 bits) de un arreglo."""
    v = np.asarray(values, dtype=np.int64)
    v = v ^ (v >> 16)
    v = v ^ (v >> 8)
    v = v ^ (v >> 4)
    return (0x6996 >> (v & 0xF)) & 1


def popcount(values):
    v = np.asarray(values, dtype=np.int64)
    return (_POPCOUNT8[v & 0xFF] + _POPCOUNT8[(v >> 8) & 0xFF]
            + _POPCOUNT8[(v >> 16) & 0xFF] + _POPCOUNT8[(v >> 24) & 0xFF])


def coordinate_bits(n):
    """Matriz (2^n, n) con el bit i de cada vector."""
    idx = np.arange(1 << n, dtype=np.int64)
    return ((idx[:, None] >> np.arange(n)[None, :]) & 1).astype(np.int8)


def echelonize(vectors):
    """
    Forma escalonada reducida de una lista de vectores.

    Retorna:
      tuple: (base ordenada por pivote descendente, True si habia vectores dependientes)
    """
    basis = []
    dependent = False
    for v in vectors:
        v = int(v)
        for b in basis:
            if (v >> (b.bit_length() - 1)) & 1:
                v ^= b
        if v == 0:
            dependent = True
            continue
        pivot = v.bit_length() - 1
        basis = [b ^ v if (b >> pivot) & 1 else b for b in basis]
        basis.append(v)
        basis.sort(reverse=True)
    return basis, dependent


def reduce_array(values, basis):
    """Reduce cada vector modulo el span de una base escalonada reducida."""
    v = np.array(values, dtype=np.int64, copy=True)
    for b in basis:
        pivot = b.bit_length() - 1
        v ^= ((v >> pivot) & 1) * b
    return v


def reduce_vector(value, basis):
    v = int(value)
    for b in basis:
        if (v >> (b.bit_length() - 1)) & 1:
            v ^= b
    return v


def gaussian_binomial(d, k):
    """Numero de subespacios lineales de dimension k en F_2^d."""
    if k < 0 or k > d:
        return 0
    num = 1
    den = 1
    for i in range(k):
        num *= (1 << (d - i)) - 1
        den *= (1 << (i + 1)) - 1
    return num // den


def affine_subspace_count(d, codim):
    """Subespacios afines de codimension `codim` dentro de un espacio de dimension d."""
    return gaussian_binomial(d, codim) << codim


@dataclass(frozen=True, order=True)
class F2Vector:
    bits: int
    ambient_dim: int

    def __post_init__(self):
        n = _check_dim(self.ambient_dim)
        if not 0 <= int(self.bits) < (1 << n):
            raise RejectedInputError(f"vector {self.bits} does not fit in F_2^{n}")
        object.__setattr__(self, 'bits', int(self.bits))
        object.__setattr__(self, 'ambient_dim', n)

    def __add__(self, other):
        return vec_add(self, other)

    def __int__(self):
        return self.bits

    def weight(self):
        return bin(self.bits).count('1')

    def support(self):
        return [i for i in range(self.ambient_dim) if (self.bits >> i) & 1]


def vec_add(u, v):
    if u.ambient_dim != v.ambient_dim:
        raise RejectedInputError(f"dimension mismatch: {u.ambient_dim} vs {v.ambient_dim}")
    return F2Vector(u.bits ^ v.bits, u.ambient_dim)


class F2Set:
    """Subconjunto de F_2^n guardado como bitset de largo 2^n."""

    def __init__(self, ambient_dim, membership):
        n = _check_dim(ambient_dim)
        mem = np.array(membership, dtype=bool, copy=True)
        if mem.shape != (1 << n,):
            raise RejectedInputError(f"membership must have length 2^{n}, got {mem.shape}")
        mem.setflags(write=False)
        self.ambient_dim = n
        self.membership = mem
        self.size = int(np.count_nonzero(mem))
        self._members = None

    @classmethod
    def from_members(cls, ambient_dim, members):
        n = _check_dim(ambient_dim)
        arr = np.asarray(list(members) if not isinstance(members, np.ndarray) else members,
                         dtype=np.int64)
        if arr.size and (arr.min() < 0 or arr.max() >= (1 << n)):
            raise RejectedInputError(f"member outside F_2^{n}")
        mem = np.zeros(1 << n, dtype=bool)
        mem[arr] = True
        return cls(n, mem)

    @classmethod
    def empty(cls, ambient_dim):
        return cls(ambient_dim, np.zeros(1 << _check_dim(ambient_dim), dtype=bool))

    @classmethod
    def full(cls, ambient_dim):
        return cls(ambient_dim, np.ones(1 << _check_dim(ambient_dim), dtype=bool))

    @classmethod
    def random(cls, ambient_dim, density, rng):
        """Subconjunto uniforme de tamano exacto round(density * 2^n)."""
        n = _check_dim(ambient_dim)
        density = Fraction(density).limit_denominator(1 << 30)
        if not 0 <= density <= 1:
            raise RejectedInputError(f"density {density} outside [0, 1]")
        k = int(round(density * (1 << n)))
        members = rng.choice(1 << n, size=k, replace=False)
        return cls.from_members(n, members)

    @property
    def members(self):
        if self._members is None:
            self._members = np.flatnonzero(self.membership).astype(np.int64)
            self._members.setflags(write=False)
        return self._members

    @property
    def density(self):
        return Fraction(self.size, 1 << self.ambient_dim)

    def __len__(self):
        return self.size

    def __iter__(self):
        return (int(v) for v in self.members)

    def __contains__(self, v):
        v = int(v)
        return 0 <= v < (1 << self.ambient_dim) and bool(self.membership[v])

    def __eq__(self, other):
        if not isinstance(other, F2Set):
            return NotImplemented
        return (self.ambient_dim == other.ambient_dim
                and np.array_equal(self.membership, other.membership))

    def __hash__(self):
        return hash((self.ambient_dim, np.packbits(self.membership).tobytes()))

    def __repr__(self):
        return f"F2Set(n={self.ambient_dim}, size={self.size})"

    def _same_space(self, other):
        if self.ambient_dim != other.ambient_dim:
            raise RejectedInputError(
                f"dimension mismatch: {self.ambient_dim} vs {other.ambient_dim}")

    def __and__(self, other):
        self._same_space(other)
        return F2Set(self.ambient_dim, self.membership & other.membership)

    def __or__(self, other):
        self._same_space(other)
        return F2Set(self.ambient_dim, self.membership | other.membership)

    def __sub__(self, other):
        self._same_space(other)
        return F2Set(self.ambient_dim, self.membership & ~other.membership)

    def complement(self):
        return F2Set(self.ambient_dim, ~self.membership)

    def shift(self, v):
        """{a + v : a in A}"""
        idx = np.arange(1 << self.ambient_dim, dtype=np.int64)
        return F2Set(self.ambient_dim, self.membership[idx ^ int(v)])

    def restrict(self, space):
        if space.ambient_dim != self.ambient_dim:
            raise RejectedInputError("dimension mismatch between set and subspace")
        keep = self.members[space.contains_array(self.members)]
        return F2Set.from_members(self.ambient_dim, keep)

    def issubset(self, other):
        self._same_space(other)
        return not np.any(self.membership & ~other.membership)

    def to_json(self):
        return {"n": self.ambient_dim, "members": [int(v) for v in self.members]}

    @classmethod
    def from_json(cls, data):
        try:
            return cls.from_members(int(data["n"]), [int(v) for v in data["members"]])
        except (KeyError, TypeError) as exc:
            raise RejectedInputError(f"malformed set description: {exc}") from exc

    def to_bytes(self):
        """Bitset little-endian precedido por el numero de bits (uint64)."""
        bits = np.packbits(self.membership, bitorder='little').tobytes()
        return struct.pack('<Q', 1 << self.ambient_dim) + bits

    @classmethod
    def from_bytes(cls, data):
        if len(data) < 8:
            raise RejectedInputError("truncated bitset")
        (length,) = struct.unpack('<Q', data[:8])
        n = length.bit_length() - 1
        if length != (1 << n):
            raise RejectedInputError(f"bitset length {length} is not a power of two")
        raw = np.frombuffer(data[8:], dtype=np.uint8)
        mem = np.unpackbits(raw, bitorder='little')[:length]
        if mem.size != length:
            raise RejectedInputError("truncated bitset")
        return cls(n, mem.astype(bool))


@dataclass(frozen=True)
class AffineSubspace:
    """
    offset + span(basis) dentro de F_2^n, siempre en forma canonica:
    base escalonada reducida con pivotes descendentes y offset reducido modulo la base.
    Dos instancias son iguales si y solo si representan el mismo conjunto de puntos.
    """
    ambient_dim: int
    offset: int = 0
    basis: tuple = ()
    _local: object = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        n = _check_dim(self.ambient_dim)
        vectors = [int(b) for b in self.basis]
        if any(not 0 < b < (1 << n) for b in vectors):
            raise RejectedInputError(f"basis vector outside F_2^{n} or zero")
        basis, dependent = echelonize(vectors)
        if dependent:
            raise RejectedInputError("basis vectors are linearly dependent")
        offset = int(self.offset)
        if not 0 <= offset < (1 << n):
            raise RejectedInputError(f"offset {offset} outside F_2^{n}")
        object.__setattr__(self, 'ambient_dim', n)
        object.__setattr__(self, 'basis', tuple(basis))
        object.__setattr__(self, 'offset', reduce_vector(offset, basis))

    @classmethod
    def full(cls, n):
        return cls(n, 0, tuple(1 << i for i in range(n)))

    @classmethod
    def point(cls, n, v):
        return cls(n, int(v), ())

    @classmethod
    def span(cls, n, generators, offset=0):
        """Subespacio generado por vectores arbitrarios (se descartan los dependientes)."""
        basis, _ = echelonize(int(g) for g in generators if int(g))
        return cls(n, int(offset), tuple(basis))

    @property
    def dim(self):
        return len(self.basis)

    @property
    def codim(self):
        return self.ambient_dim - self.dim

    @property
    def size(self):
        return 1 << self.dim

    @property
    def pivots(self):
        return tuple(b.bit_length() - 1 for b in self.basis)

    @property
    def is_linear(self):
        return self.offset == 0

    def direction(self):
        return AffineSubspace(self.ambient_dim, 0, self.basis)

    def translate(self, v):
        return AffineSubspace(self.ambient_dim, self.offset ^ int(v), self.basis)

    def contains(self, v):
        return reduce_vector(int(v) ^ self.offset, self.basis) == 0

    def __contains__(self, v):
        return self.contains(v)

    def contains_array(self, values):
        values = np.asarray(values, dtype=np.int64)
        return reduce_array(values ^ self.offset, self.basis) == 0

    def contains_subspace(self, other):
        return (other.ambient_dim == self.ambient_dim
                and self.contains(other.offset)
                and all(reduce_vector(b, self.basis) == 0 for b in other.basis))

    def coset_keys(self, values):
        """Representante canonico de v + span(basis) para cada v."""
        return reduce_array(values, self.basis)

    def local_points(self):
        """Puntos en orden local: el indice c tiene el bit j si usa basis[j]."""
        if self._local is None:
            arr = np.array([self.offset], dtype=np.int64)
            for b in self.basis:
                arr = np.concatenate([arr, arr ^ b])
            arr.setflags(write=False)
            object.__setattr__(self, '_local', arr)
        return self._local

    def points(self):
        return np.sort(self.local_points())

    def to_local(self, values):
        """Coordenadas locales de puntos que pertenecen al subespacio."""
        w = np.asarray(values, dtype=np.int64) ^ self.offset
        local = np.zeros_like(w)
        for j, p in enumerate(self.pivots):
            local |= ((w >> p) & 1) << j
        return local

    def from_local(self, local):
        return self.local_points()[np.asarray(local, dtype=np.int64)]

    def linear_from_local(self, u):
        """Imagen de un vector local en la parte lineal (sin offset)."""
        out = 0
        j = 0
        u = int(u)
        while u:
            if u & 1:
                out ^= self.basis[j]
            u >>= 1
            j += 1
        return out

    def sort_key(self):
        return (self.dim, self.basis, self.offset)

    def as_set(self):
        return F2Set.from_members(self.ambient_dim, self.local_points())

    def to_json(self):
        return {"n": self.ambient_dim, "offset": self.offset, "basis": list(self.basis)}

    @classmethod
    def from_json(cls, data):
        try:
            return cls(int(data["n"]), int(data.get("offset", 0)),
                       tuple(int(b) for b in data.get("basis", [])))
        except (KeyError, TypeError) as exc:
            raise RejectedInputError(f"malformed subspace description: {exc}") from exc


def density(A, V):
    """|A ∩ V| / |V| exacto."""
    if A.ambient_dim != V.ambient_dim:
        raise RejectedInputError(f"dimension mismatch: {A.ambient_dim} vs {V.ambient_dim}")
    count = int(np.count_nonzero(A.membership[V.local_points()]))
    return Fraction(count, V.size)


def count_sum_pairs(A, B, C):
    """#{(a, b) in A x B : a + b in C}, recorriendo A por bloques."""
    xs = A.members
    ys = B.members
    if xs.size == 0 or ys.size == 0:
        return 0
    step = max(1, CHUNK_CELLS // ys.size)
    total = 0
    for start in range(0, xs.size, step):
        block = xs[start:start + step]
        total += int(np.count_nonzero(C.membership[block[:, None] ^ ys[None, :]]))
    return total


def convolution_inner_product(A, B, C):
    """<phi_A * phi_B, phi_C> = |S(A,B,C)| * 2^n / (|A||B||C|)."""
    for s in (B, C):
        if s.ambient_dim != A.ambient_dim:
            raise RejectedInputError("dimension mismatch")
    if A.size == 0 or B.size == 0 or C.size == 0:
        raise RejectedInputError("convolution inner product needs nonempty sets")
    count = count_sum_pairs(A, B, C)
    return Fraction(count << A.ambient_dim, A.size * B.size * C.size)


def rref_constraint_systems(d, c):
    """
    Todas las matrices c x d de rango c en forma escalonada reducida
    (pivote = bit mas alto de cada fila), una por subespacio del dual.
    """
    if c == 0:
        yield ()
        return
    for pivots in itertools.combinations(range(d), c):
        pivot_set = set(pivots)
        free = [[q for q in range(p) if q not in pivot_set] for p in pivots]
        for fills in itertools.product(*[range(1 << len(f)) for f in free]):
            rows = []
            for p, positions, bits in zip(pivots, free, fills):
                row = 1 << p
                for k, q in enumerate(positions):
                    if (bits >> k) & 1:
                        row |= 1 << q
                rows.append(row)
            yield tuple(sorted(rows, reverse=True))


def constraints_to_subspace(V, rows, syndrome):
    """
    Subespacio afin de V definido en coordenadas locales por <rows[j], u> = bit j de syndrome.
    Retorna None si el sistema es inconsistente.
    """
    reduced = []
    for j, row in enumerate(rows):
        row = int(row)
        bit = (int(syndrome) >> j) & 1
        for entry in reduced:
            if (row >> (entry[0].bit_length() - 1)) & 1:
                row ^= entry[0]
                bit ^= entry[1]
        if row == 0:
            if bit:
                return None
            continue
        pivot = row.bit_length() - 1
        for entry in reduced:
            if (entry[0] >> pivot) & 1:
                entry[0] ^= row
                entry[1] ^= bit
        reduced.append([row, bit])
        reduced.sort(key=lambda e: e[0], reverse=True)

    pivots = {entry[0].bit_length() - 1: entry for entry in reduced}
    particular = 0
    for p, (_, bit) in pivots.items():
        if bit:
            particular |= 1 << p
    kernel = []
    for q in range(V.dim):
        if q in pivots:
            continue
        u = 1 << q
        for p, (row, _) in pivots.items():
            if (row >> q) & 1:
                u |= 1 << p
        kernel.append(V.linear_from_local(u))
    offset = V.offset ^ V.linear_from_local(particular)
    return AffineSubspace(V.ambient_dim, offset, tuple(kernel))


def enumerate_affine_subspaces(V, codim, budget=MAX_ENUMERATED_SUBSPACES):
    """
    Todos los subespacios afines de V de dimension dim(V) - codim, cada uno una vez.
    Se enumeran restricciones duales en forma canonica y luego sus 2^codim corrimientos.
    """
    if not 0 <= codim <= V.dim:
        raise RejectedInputError(f"codimension {codim} outside [0, {V.dim}]")
    needed = affine_subspace_count(V.dim, codim)
    if needed > budget:
        raise BudgetExceededError(
            f"enumerating codim-{codim} subspaces of a {V.dim}-dim space", needed, budget,
            advice="use the sampled spreadness mode sampled:COUNT:SEED")

    def stream():
        for rows in rref_constraint_systems(V.dim, codim):
            for syndrome in range(1 << codim):
                yield constraints_to_subspace(V, rows, syndrome)

    return stream()


def coset_decompose(V, W):
    """Un representante canonico por cada coset de W (lineal) dentro de V."""
    if W.ambient_dim != V.ambient_dim:
        raise RejectedInputError("dimension mismatch")
    if not W.is_linear:
        raise RejectedInputError("W must be a linear subspace")
    if not V.direction().contains_subspace(W):
        raise RejectedInputError("W is not contained in the direction space of V")
    chosen = list(W.basis)
    complement = []
    for b in V.basis:
        extended, dependent = echelonize(chosen + [b])
        if not dependent:
            chosen = extended
            complement.append(b)
    reps = np.array([V.offset], dtype=np.int64)
    for b in complement:
        reps = np.concatenate([reps, reps ^ b])
    reps = np.unique(W.coset_keys(reps))
    return [F2Vector(int(v), V.ambient_dim) for v in reps]


class FiniteDistribution:
    """
    Distribucion sobre puntos opacos (claves hashables).

    Modo exacto: `weights` son numeradores enteros (dtype object) sobre un
    denominador comun. Modo flotante: `weights` son probabilidades.
    """

    def __init__(self, weights, denominator=None):
        if not isinstance(weights, pd.Series):
            raise RejectedInputError("weights must be a pandas Series")
        if not weights.index.is_unique:
            raise RejectedInputError("support points must be distinct")
        if denominator is None:
            w = weights.astype(float)
            if (w < 0).any():
                raise RejectedInputError("negative probability")
            total = math.fsum(w.tolist())
            tolerance = max(1e-12, len(w) * 2.0 ** -52)
            if abs(total - 1.0) > tolerance:
                raise RejectedInputError(f"probabilities sum to {total}, not 1")
            self.weights = w[w > 0]
            self.denominator = None
        else:
            denominator = int(denominator)
            w = weights.map(int).astype(object)
            if denominator <= 0 or any(v < 0 for v in w.tolist()):
                raise RejectedInputError("weights must be nonnegative over a positive denominator")
            if sum(w.tolist()) != denominator:
                raise RejectedInputError("weights do not sum to the denominator")
            self.weights = w[w.map(lambda v: v > 0).astype(bool)]
            self.denominator = denominator

    @staticmethod
    def _index(points):
        return pd.Index(list(points), tupleize_cols=False)

    @classmethod
    def from_counts(cls, points, counts):
        counts = [int(c) for c in counts]
        return cls(pd.Series(counts, index=cls._index(points), dtype=object), sum(counts))

    @classmethod
    def from_probabilities(cls, points, probabilities):
        return cls(pd.Series(np.asarray(probabilities, dtype=float), index=cls._index(points)))

    @classmethod
    def from_frequencies(cls, points, counts):
        counts = np.asarray(counts, dtype=float)
        return cls.from_probabilities(points, counts / counts.sum())

    @classmethod
    def uniform(cls, points):
        points = list(points)
        return cls.from_counts(points, [1] * len(points))

    @property
    def is_exact(self):
        return self.denominator is not None

    @property
    def support(self):
        return self.weights.index

    def __len__(self):
        return len(self.weights)

    def prob(self, point):
        if point not in self.weights.index:
            return Fraction(0) if self.is_exact else 0.0
        value = self.weights[point]
        return Fraction(int(value), self.denominator) if self.is_exact else float(value)

    def probabilities(self):
        if self.is_exact:
            return self.weights.map(lambda v: Fraction(int(v), self.denominator))
        return self.weights.copy()

    def as_float(self):
        if not self.is_exact:
            return self.weights.astype(float)
        return self.weights.astype(float) / float(self.denominator)

    def sample(self, rng, size):
        idx = rng.choice(len(self.weights), size=size, p=self.as_float().to_numpy())
        return self.weights.index[idx]


def load_set(path):
    if str(path).endswith('.bin'):
        with open(path, 'rb') as f:
            return F2Set.from_bytes(f.read())
    with open(path, 'r', encoding='utf-8') as f:
        try:
            return F2Set.from_json(json.load(f))
        except json.JSONDecodeError as exc:
            raise RejectedInputError(f"{path}: {exc}") from exc


def save_set(A, path):
    if str(path).endswith('.bin'):
        with open(path, 'wb') as f:
            f.write(A.to_bytes())
        return
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(A.to_json(), f)


def load_subspace(path):
    with open(path, 'r', encoding='utf-8') as f:
        try:
            return AffineSubspace.from_json(json.load(f))
        except json.JSONDecodeError as exc:
            raise RejectedInputError(f"{path}: {exc}") from exc


def save_subspace(V, path):
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(V.to_json(), f)
