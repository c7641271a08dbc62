
import pandas as pd

from algorithms.spreadness import (IterationRecord, SpreadParams, check_algebraic_spread,
                                   check_combinatorial_spread, check_left_marginals,
                                   extract_spread_subset, max_density_increments, sum_set_relation)
from libs.f2core import AffineSubspace, density, load_subspace


class SpreadCheck:
    """
    Con --set: chequeo algebraico de A dentro de V (y extraccion con --extract).
    Con --x/--y/--z: chequeo combinatorio y de marginales de f(x,y) = 1[x+y en Z].
    """

    def __init__(self):
        pass

    def check_spread(self, config, helper):
        p = config.params
        eps = helper.parse_fraction(p.get('eps'), '--eps')
        r = helper.require_param(p.get('r'), '--r')
        params = SpreadParams.parse_mode(r, eps, p.get('mode') or 'exact')
        if p.get('set'):
            return self._algebraic(p, params, helper)
        return self._combinatorial(p, params, helper)

    def _algebraic(self, p, params, helper):
        A = helper.load_set_arg(p['set'], p.get('n'), '--set')
        V = load_subspace(p['space']) if p.get('space') else AffineSubspace.full(A.ambient_dim)
        verdict = check_algebraic_spread(A, V, params)
        result = {'kind': 'algebraic', 'n': A.ambient_dim, 'size': A.size,
                  'density': density(A, V), 'space': V.to_json()}
        result.update(verdict.to_dict())
        table = None
        if p.get('extract'):
            found = extract_spread_subset(A, V, params.r, params.epsilon)
            result['extracted'] = {'space': found.space.to_json(), 'size': found.subset.size,
                                   'steps': len(found.log),
                                   'step_bound': max_density_increments(density(A, V), params.epsilon)}
            table = pd.DataFrame([r._asdict() for r in found.log], columns=IterationRecord._fields)
        line = 'passed' if verdict.passed else f"failed ratio={verdict.observed_ratio}"
        return result, table, line

    def _combinatorial(self, p, params, helper):
        n = p.get('n')
        X = helper.load_set_arg(p.get('x'), n, '--x')
        Y = helper.load_set_arg(p.get('y'), n, '--y')
        Z = helper.load_set_arg(p.get('z'), n, '--z')
        f = sum_set_relation(X, Y, Z)
        verdict = check_combinatorial_spread(f, params.r, params.epsilon, params.mode,
                                             params.sample_count, params.seed)
        marginals = check_left_marginals(f, params.r, params.epsilon)
        result = {'kind': 'combinatorial', 'n': X.ambient_dim,
                  'rows': f.left_size, 'cols': f.right_size, 'mean': f.mean,
                  'rectangles': verdict.to_dict(), 'left_marginals': marginals.to_dict(),
                  'passed': verdict.passed and marginals.passed}
        line = 'passed' if result['passed'] else 'failed'
        return result, None, line
