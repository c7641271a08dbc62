import logging
from fractions import Fraction

import pandas as pd

from algorithms.diagprod import (build_diagonal_product, conditional_square_distances,
                                 enumerate_squares, nontrivial_coordinate_stats)
from algorithms.games import RepeatedGame
from algorithms.hardness import (conditional_win_battery, max_fraction, square_hardness_sweep,
                                 transcript_conditional_report, win_random_subset)
from algorithms.spreadness import SpreadParams, check_algebraic_spread
from experiments.game_value import load_game_arg
from libs.errors import RejectedInputError
from libs.f2core import AffineSubspace
from strategies.set_strategies import StrategyBattery

logger = logging.getLogger(__name__)


def _int_list(text, flag):
    if not text:
        return []
    try:
        return [int(v) for v in str(text).split(',') if v.strip()]
    except ValueError as exc:
        raise RejectedInputError(f"{flag} must be a comma separated list of integers") from exc


class HardCoordinate:
    """
    Bateria de estrategias contra el evento E x F x G en G^n: probabilidades
    condicionales por coordenada, coordenadas no triviales de los cuadrados de
    S(E,F,G) y, a pedido, subconjuntos aleatorios, transcripciones y cuadrados.
    """

    def __init__(self):
        pass

    def run_battery(self, config, helper):
        p = config.params
        seed = helper.require_seed(config.seed)
        n = int(helper.require_param(p.get('n'), '--n'))
        game = load_game_arg(p.get('game'))
        E = helper.load_set_arg(p.get('e'), n, '--e')
        F = helper.load_set_arg(p.get('f'), n, '--f')
        G = helper.load_set_arg(p.get('g'), n, '--g')
        Gn = RepeatedGame(game, n)
        battery = StrategyBattery(Gn, seed, p.get('battery') or 'default')
        strategies = battery.get_object_strategies()
        result = {'n': n, 'game': game.name, 'battery': battery.kind, 'strategies': len(strategies),
                  'sizes': {'E': E.size, 'F': F.size, 'G': G.size}}
        if p.get('r') is not None and p.get('eps') is not None:
            params = SpreadParams(int(p['r']), helper.parse_fraction(p['eps'], '--eps'))
            V = AffineSubspace.full(n)
            result['certificates'] = {name: check_algebraic_spread(A, V, params).to_dict()
                                      for name, A in (('E', E), ('F', F), ('G', G))}
        table = conditional_win_battery(strategies, E, F, G, game, config.max_pairs)
        best = table.loc[table['mean_float'].idxmax()]
        result['max_mean'] = best['mean']
        result['max_strategy'] = best['strategy']
        result['table'] = table

        S = build_diagonal_product(E, F, G, config.max_pairs)
        T = enumerate_squares(S, config.max_triples)
        if T.count:
            distances = conditional_square_distances(T)
            stats = nontrivial_coordinate_stats(T)
            result['nontrivial'] = {'mean': stats.mean, 'ratio': stats.mean / n,
                                    'histogram': stats.histogram,
                                    'conditional_mean_l1': distances.mean,
                                    'zero_mass': distances.zero_mass}

        sizes = _int_list(p.get('subset_sizes'), '--subset_sizes')
        if sizes:
            rows = []
            for name, s in strategies.items():
                for t in sizes:
                    estimate = win_random_subset(s, Gn, t, int(p.get('trials') or 0), seed)
                    rows.append({'strategy': name, 't': t, 'value': estimate.value,
                                 'value_float': float(estimate.value), 'stderr': estimate.stderr,
                                 'bound': 2 * Fraction(17, 20) ** t})
            subsets = pd.DataFrame(rows)
            result['random_subsets'] = subsets
            result['random_subsets_max'] = {int(t): g['value_float'].max()
                                            for t, g in subsets.groupby('t')}

        coords = _int_list(p.get('transcript_coords'), '--transcript_coords')
        if coords:
            name = p.get('strategy') or 'product_optimal'
            if name not in strategies:
                raise RejectedInputError(f"--strategy {name!r} is not in the battery")
            result['transcript'] = transcript_conditional_report(strategies[name], n, coords, game)

        if p.get('squares'):
            sweep = {name: square_hardness_sweep(s, n, game) for name, s in strategies.items()}
            result['squares'] = {name: {'histogram': h, 'max_fraction': max_fraction(h)}
                                 for name, h in sweep.items()}
            result['squares_max'] = max(max_fraction(h) for h in sweep.values())

        logger.info(f"hard-coordinate n={n}: max mean {float(best['mean']):.4f} ({best['strategy']})")
        line = f"max mean {best['mean']} ({best['strategy']})"
        return result, table, line
