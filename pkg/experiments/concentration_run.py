from algorithms.concentration import concentration_experiment
from algorithms.games import RepeatedGame, game_value_bruteforce
from experiments.game_value import load_game_arg
from strategies.set_strategies import StrategyBattery


class Concentration:
    def __init__(self):
        pass

    def run_tail(self, config, helper):
        """Cola Pr[Z >= (val + eps) n] para la bateria mas el control de valor minimo."""
        p = config.params
        seed = helper.require_seed(config.seed)
        n = int(helper.require_param(p.get('n'), '--n'))
        eps = helper.parse_fraction(p.get('eps'), '--eps')
        trials = int(p.get('trials') or 0)
        game = load_game_arg(p.get('game'))
        Gn = RepeatedGame(game, n)
        value, _ = game_value_bruteforce(game)
        battery = StrategyBattery(Gn, seed, p.get('battery') or 'default',
                                  threshold=float((value + eps) * n))
        strategies = battery.get_object_strategies()
        strategies['min_value_product'] = battery.minimal_product()
        outcome = concentration_experiment(strategies, Gn, eps, trials, seed, value)
        table = outcome.table
        heuristic = table[table['strategy'] != 'min_value_product']
        result = outcome.to_dict()
        result.update({'n': n, 'eps': eps, 'trials': trials, 'game': game.name,
                       'max_frequency': float(heuristic['frequency'].max())})
        line = f"max tail {result['max_frequency']:.5f} chernoff {outcome.chernoff_upper:.3e}"
        return result, table, line
