from fractions import Fraction

import pandas as pd

from algorithms.diagprod import l1_distance
from algorithms.infostats import (TripleCounts, binary_entropy_gap, conditional_marginal_report,
                                  empirical_tail, entropy_report, uniform_prefix_distance,
                                  uniform_prefix_pair)
from libs.errors import RejectedInputError

WHICH = ('entropy', 'marginal', 'chernoff', 'prefix')


class AppendixCheck:
    def __init__(self):
        pass

    def check_appendix(self, config, helper):
        p = config.params
        which = p.get('which') or 'entropy'
        if which == 'entropy':
            return self._entropy(config, helper)
        elif which == 'marginal':
            return self._marginal(config, helper)
        elif which == 'chernoff':
            return self._chernoff(config, helper)
        elif which == 'prefix':
            return self._prefix(config)
        raise RejectedInputError(f"--which must be one of {', '.join(WHICH)}, got {which!r}")

    def _random_triples(self, config, helper):
        n = int(config.params.get('n') or 8)
        density = helper.parse_fraction(config.params.get('density') or '9/10', '--density')
        seed = helper.require_seed(config.seed)
        return n, TripleCounts.random_subset(n, density, helper.task_rng(seed, 0))

    def _entropy(self, config, helper):
        grid = [Fraction(k, 1000) for k in range(1001)]
        rows = []
        for q in grid:
            lhs, rhs = binary_entropy_gap(q)
            rows.append({'p': q, 'lhs': float(lhs), 'rhs': rhs, 'holds': float(lhs) <= rhs + 1e-12})
        table = pd.DataFrame(rows, columns=['p', 'lhs', 'rhs', 'holds'])
        result = {'which': 'entropy', 'grid_points': len(grid), 'holds': bool(table['holds'].all())}
        if config.seed is not None:
            _, T = self._random_triples(config, helper)
            result['triples'] = entropy_report(T)
        line = 'holds' if result['holds'] else 'violated'
        return result, table, line

    def _marginal(self, config, helper):
        n = int(config.params.get('n') or 8)
        full = conditional_marginal_report(TripleCounts.full_cube(n))
        result = {'which': 'marginal', 'n': n, 'full_cube': full}
        table = full.table
        if config.seed is not None:
            _, T = self._random_triples(config, helper)
            random_report = conditional_marginal_report(T)
            result['random'] = random_report
            table = random_report.table
            line = f"full={full.mean} random={float(random_report.mean):.5f}"
        else:
            line = f"full={full.mean}"
        return result, table, line

    def _chernoff(self, config, helper):
        p = config.params
        seed = helper.require_seed(config.seed)
        n = int(p.get('n') or 1000)
        mu = helper.parse_fraction(p.get('mu') or '1/2', '--mu')
        delta = helper.parse_fraction(p.get('delta') or '1/5', '--delta')
        trials = int(p.get('trials') or 100000)
        tail = empirical_tail(n, mu, delta, trials, seed)
        result = {'which': 'chernoff', 'n': n, 'mu': mu, 'delta': delta, 'tail': tail._asdict(),
                  'holds': tail.frequency <= tail.bound + 4 * tail.stderr}
        return result, pd.DataFrame([tail._asdict()]), f"frequency {tail.frequency:.5f} bound {tail.bound:.5f}"

    def _prefix(self, config):
        n_max = int(config.params.get('n') or 64)
        rows = []
        for n in range(1, n_max + 1):
            for t in range(n):
                mu, nu = uniform_prefix_pair(n, t)
                rows.append({'n': n, 't': t, 'formula': uniform_prefix_distance(n, t),
                             'direct': l1_distance(mu, nu)})
        table = pd.DataFrame(rows, columns=['n', 't', 'formula', 'direct'])
        agree = all(a == b for a, b in zip(table['formula'], table['direct']))
        result = {'which': 'prefix', 'n_max': n_max, 'cases': len(table), 'agree': agree}
        return result, table, 'agree' if agree else 'disagree'
