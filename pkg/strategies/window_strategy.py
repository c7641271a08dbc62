import numpy as np

from libs.errors import RejectedInputError


class WindowStrategy:
    """
    Estrategia para alfabetos binarios: el bit de respuesta en la coordenada i depende de
    las preguntas en las coordenadas i, i+1, ..., i+k-1 (ciclicas). Con k = 1 es una
    estrategia producto con tablas distintas por coordenada.
    """

    def __init__(self, tables, name='window'):
        tables = np.asarray(tables, dtype=np.int8)
        if tables.ndim != 3 or tables.shape[0] != 3:
            raise RejectedInputError("window tables must have shape (3, n, 2**k)")
        k = int(np.log2(tables.shape[2]))
        if 1 << k != tables.shape[2]:
            raise RejectedInputError("window table width must be a power of two")
        self.tables = tables
        self.n = tables.shape[1]
        self.k = k
        self.name = name

    def patterns(self, questions):
        questions = np.asarray(questions, dtype=np.int64)
        bits = (questions[:, None] >> np.arange(self.n)[None, :]) & 1
        out = np.zeros_like(bits)
        for j in range(self.k):
            out |= np.roll(bits, -j, axis=1) << j
        return out

    def answers(self, player, questions):
        pattern = self.patterns(questions)
        coords = np.arange(self.n)[None, :]
        bits = self.tables[player][coords, pattern].astype(np.int64)
        return (bits << np.arange(self.n, dtype=np.int64)[None, :]).sum(axis=1)

    def flipped(self, player, coordinate, pattern):
        tables = self.tables.copy()
        tables[player, coordinate, pattern] ^= 1
        return WindowStrategy(tables, self.name)

    def to_dict(self):
        return {'kind': 'window', 'name': self.name, 'k': self.k, 'tables': self.tables.tolist()}

    @classmethod
    def random(cls, n, k, rng, name='window-random'):
        return cls(rng.integers(0, 2, size=(3, n, 1 << k), dtype=np.int8), name)

    @classmethod
    def from_base_tables(cls, base_tables, n, k=1, name='window-product'):
        """Estrategia producto expresada como ventana: solo mira el bit propio."""
        tables = np.zeros((3, n, 1 << k), dtype=np.int8)
        own = np.arange(1 << k) & 1
        for p in range(3):
            tables[p, :, :] = np.asarray(base_tables[p], dtype=np.int8)[own][None, :]
        return cls(tables, name)
