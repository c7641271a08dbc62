import logging

from experiments.set_experiments import Experiment
from libs.errors import RejectedInputError
from libs.functions import Helper

logger = logging.getLogger(__name__)


class SpreadLab:
    def __init__(self, seed=None):
        self.helpers = Helper(seed)

        #Instancia con todos los objetos necesarios para correr un experimento determinado
        self.experiments = Experiment()

    def get_specific_experiment(self, config, key):
        #key: subcomando
        #value: objeto que implementa el experimento
        registry = self.experiments.get_object_experiments()
        if key not in registry:
            raise RejectedInputError(f"unknown subcommand {key!r}; choose one of {', '.join(registry)}")
        experiment = registry[key]
        logger.info(f"experiment: {key}")

        if key == 'spread-check':
            print("experiment: spread-check")
            return experiment.check_spread(config, self.helpers)
        elif key == 'uniformize':
            print("experiment: uniformize")
            return experiment.decompose(config, self.helpers)
        elif key == 'square-cover':
            print("experiment: square-cover")
            return experiment.count_squares(config, self.helpers)
        elif key == 'game-value':
            print("experiment: game-value")
            return experiment.solve_game(config, self.helpers)
        elif key == 'hard-coordinate':
            print("experiment: hard-coordinate")
            return experiment.run_battery(config, self.helpers)
        elif key == 'concentration':
            print("experiment: concentration")
            return experiment.run_tail(config, self.helpers)
        elif key == 'appendix-check':
            print("experiment: appendix-check")
            return experiment.check_appendix(config, self.helpers)
