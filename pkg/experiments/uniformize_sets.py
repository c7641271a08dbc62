import logging

from algorithms.uniformize import uniformize_recursive, verify_decomposition
from libs.config import UniformizeConfig
from libs.errors import PostconditionError
from libs.f2core import AffineSubspace, load_subspace

logger = logging.getLogger(__name__)


class Uniformize:
    def __init__(self):
        pass

    def decompose(self, config, helper):
        """
        Descomposicion recursiva de S(X,Y,Z) y su verificacion independiente. Una
        verificacion fallida sale con PostconditionError y el reporte adjunto.
        """
        p = config.params
        n = p.get('n')
        X = helper.load_set_arg(p.get('x'), n, '--x')
        Y = helper.load_set_arg(p.get('y'), n, '--y')
        Z = helper.load_set_arg(p.get('z'), n, '--z')
        V = load_subspace(p['space']) if p.get('space') else AffineSubspace.full(X.ambient_dim)
        r = int(helper.require_param(p.get('r'), '--r'))
        eps = helper.parse_fraction(p.get('eps'), '--eps')
        eta = helper.parse_fraction(p.get('eta'), '--eta')
        depth = p.get('depth') or 'auto'
        settings = UniformizeConfig(
            round_codim=None if p.get('round_codim') is None else int(p['round_codim']),
            depth=None if depth == 'auto' else int(depth))
        result = uniformize_recursive(X, Y, Z, V, r, eps, eta, settings)
        report = verify_decomposition(result, X, Y, Z, V)
        out = result.to_dict()
        out['verification'] = report.to_dict()
        out['coverage'] = (result.covered / result.total) if result.total else None
        if not report.ok:
            logger.error(f"decomposition failed verification: {report.failures[:3]}")
            raise PostconditionError(f"verification failed: {report.failures[0]}", out)
        line = f"{len(result.pieces)} pieces covering {result.covered}/{result.total} pairs"
        return out, result.log, line
