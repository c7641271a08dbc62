import pandas as pd

from algorithms.diagprod import (build_diagonal_product, conditional_square_distances,
                                 counting_report, enumerate_squares)

ROW_COLUMNS = ['n', 'size_x', 'size_y', 'size_z', 'size_s', 'size_t', 'dev_size', 'dev_gamma_l1',
               'dev_gamma_l2sq', 'dev_squares', 'l1_mu_us', 'mean_nontrivial']


def _as_float(value):
    return None if value is None else float(value)


class SquareCover:
    """Conteos de cuadrados en S(X,Y,Z); los conjuntos por defecto son F_2^n completo."""

    def __init__(self):
        pass

    def count_squares(self, config, helper):
        p = config.params
        n = p.get('n')
        X = helper.load_set_arg(p.get('x') or 'full', n, '--x')
        Y = helper.load_set_arg(p.get('y') or 'full', n, '--y')
        Z = helper.load_set_arg(p.get('z') or 'full', n, '--z')
        report = counting_report(X, Y, Z, config.max_pairs, config.max_triples)
        if p.get('conditional'):
            S = build_diagonal_product(X, Y, Z, config.max_pairs)
            distances = conditional_square_distances(enumerate_squares(S, config.max_triples))
            report['conditional'] = {'mean': distances.mean, 'zero_mass': distances.zero_mass,
                                     'table': distances.table}
        sizes = report['sizes']
        deviations = report['deviations']
        row = {'n': report['n'], 'size_x': sizes['X'], 'size_y': sizes['Y'], 'size_z': sizes['Z'],
               'size_s': sizes['S'], 'size_t': sizes['T'],
               'dev_size': _as_float(deviations['size']),
               'dev_gamma_l1': _as_float(deviations['gamma_l1']),
               'dev_gamma_l2sq': _as_float(deviations['gamma_l2sq']),
               'dev_squares': _as_float(deviations['squares']),
               'l1_mu_us': _as_float(report['l1_mu_us']),
               'mean_nontrivial': _as_float(report['mean_nontrivial'])}
        line = f"|S|={sizes['S']} |T|={sizes['T']} l1={row['l1_mu_us']}"
        return report, pd.DataFrame([row], columns=ROW_COLUMNS), line
