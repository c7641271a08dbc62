import numpy as np

from libs.errors import RejectedInputError


class TableStrategy:
    """
    Estrategia determinista explicita: una tabla por jugador, indexada por la pregunta
    codificada y con la respuesta codificada.
    """

    def __init__(self, tables, name='table'):
        if len(tables) != 3:
            raise RejectedInputError("a strategy needs one table per player")
        self.tables = tuple(np.asarray(t, dtype=np.int64).copy() for t in tables)
        self.name = name

    def answers(self, player, questions):
        return self.tables[player][np.asarray(questions, dtype=np.int64)]

    def answer(self, player, question):
        return int(self.tables[player][int(question)])

    def with_entry(self, player, question, value):
        tables = [t.copy() for t in self.tables]
        tables[player][question] = value
        return TableStrategy(tables, self.name)

    def to_dict(self):
        return {'kind': 'table', 'name': self.name,
                'tables': [t.tolist() for t in self.tables]}

    @classmethod
    def random(cls, question_spaces, answer_spaces, rng, name='random'):
        return cls([rng.integers(0, a, size=q, dtype=np.int64)
                    for q, a in zip(question_spaces, answer_spaces)], name)

    @classmethod
    def from_strategy(cls, strategy, question_spaces, name=None):
        tables = [strategy.answers(p, np.arange(question_spaces[p], dtype=np.int64))
                  for p in range(3)]
        return cls(tables, name or strategy.name)
