import numpy as np

from algorithms.games import digits_of


class ProductStrategy:
    """
    Cada jugador responde coordenada por coordenada con la misma tabla del juego base.
    """

    def __init__(self, base_tables, n, question_sizes, answer_sizes, name='product'):
        self.base_tables = tuple(np.asarray(t, dtype=np.int64) for t in base_tables)
        self.n = n
        self.question_sizes = tuple(question_sizes)
        self.answer_sizes = tuple(answer_sizes)
        self.name = name

    @classmethod
    def for_game(cls, game, base_tables, n, name='product'):
        return cls(base_tables, n, game.question_sizes, game.answer_sizes, name)

    def answers(self, player, questions):
        digits = digits_of(questions, self.question_sizes[player], self.n)
        mapped = self.base_tables[player][digits]
        powers = self.answer_sizes[player] ** np.arange(self.n, dtype=np.int64)
        return (mapped * powers[None, :]).sum(axis=1)

    def to_dict(self):
        return {'kind': 'product', 'name': self.name, 'n': self.n,
                'base_tables': [t.tolist() for t in self.base_tables]}
