from experiments.appendix_check import AppendixCheck
from experiments.concentration_run import Concentration
from experiments.game_value import GameValue
from experiments.hard_coordinate import HardCoordinate
from experiments.spread_check import SpreadCheck
from experiments.square_cover import SquareCover
from experiments.uniformize_sets import Uniformize


class Experiment:
    def __init__(self):
        self.spread_check   = SpreadCheck()
        self.uniformize     = Uniformize()
        self.square_cover   = SquareCover()
        self.game_value     = GameValue()
        self.hard_coordinate = HardCoordinate()
        self.concentration  = Concentration()
        self.appendix_check = AppendixCheck()

    def get_object_experiments(self):
        return {
            'spread-check': self.spread_check,
            'uniformize': self.uniformize,
            'square-cover': self.square_cover,
            'game-value': self.game_value,
            'hard-coordinate': self.hard_coordinate,
            'concentration': self.concentration,
            'appendix-check': self.appendix_check,
        }
