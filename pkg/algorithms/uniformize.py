"""
Descomposicion de (X, Y, Z) en piezas alineadas a cosets cuyos tres conjuntos son
algebraicamente dispersos.

Internamente cada conjunto es un arreglo ordenado de miembros (int64); los F2Set
de cada pieza se construyen solo cuando se piden.
"""
import logging
import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, NamedTuple, Optional

import numpy as np
import pandas as pd

from algorithms.spreadness import certify_points, extract_points
from libs.config import CHUNK_CELLS, UniformizeConfig
from libs.errors import IncompleteDecompositionError, RejectedInputError
from libs.f2core import AffineSubspace, F2Set

logger = logging.getLogger(__name__)


def _log2_inv(value):
    value = Fraction(value)
    return math.log2(value.denominator / value.numerator)


def _members_in(A, space, what):
    if A.ambient_dim != space.ambient_dim:
        raise RejectedInputError(f"dimension mismatch for {what}: {A.ambient_dim} vs {space.ambient_dim}")
    members = A.members
    if not np.all(space.contains_array(members)):
        raise RejectedInputError(f"{what} is not contained in its subspace")
    return members


def count_pairs(xs, ys, zs, n):
    """|S(X,Y,Z)| sobre arreglos de miembros."""
    if xs.size == 0 or ys.size == 0 or zs.size == 0:
        return 0
    inside = np.zeros(1 << n, dtype=bool)
    inside[zs] = True
    step = max(1, CHUNK_CELLS // ys.size)
    total = 0
    for start in range(0, xs.size, step):
        total += int(np.count_nonzero(inside[xs[start:start + step, None] ^ ys[None, :]]))
    return total


def pair_keys(xs, ys, zs, n):
    if xs.size == 0 or ys.size == 0 or zs.size == 0:
        return np.zeros(0, dtype=np.int64)
    inside = np.zeros(1 << n, dtype=bool)
    inside[zs] = True
    step = max(1, CHUNK_CELLS // ys.size)
    out = []
    for start in range(0, xs.size, step):
        bx = xs[start:start + step]
        rows, cols = np.nonzero(inside[bx[:, None] ^ ys[None, :]])
        out.append((bx[rows] << n) | ys[cols])
    return np.concatenate(out)


# Un conjunto ----------------------------------------------------------------

class SpreadPiece(NamedTuple):
    space: AffineSubspace
    members: np.ndarray
    verdict: object


def _one_set_points(members, space, r, epsilon, stop_at):
    """
    Pelado iterativo: mientras queden mas de `stop_at` puntos, extraer un
    subconjunto disperso y quitarlo. Retorna (piezas, resto).
    """
    rest = np.asarray(members, dtype=np.int64)
    pieces = []
    while rest.size > stop_at:
        sub_space, sub, steps, verdict = extract_points(rest, space, r, epsilon)
        pieces.append(SpreadPiece(sub_space, sub, verdict))
        logger.debug(f"one-set piece {len(pieces)}: dim {sub_space.dim}, |X_i|={sub.size}, "
                     f"{len(steps)} increments")
        rest = np.setdiff1d(rest, sub, assume_unique=True)
    return pieces, rest


def uniformize_one_set(X, V, r, epsilon, eta, multiplicative=False):
    """
    Piezas (V_i, X_i) disjuntas, cada X_i (r, epsilon)-disperso dentro de V_i con
    |X_i| >= eta |V_i|, dejando a lo sumo eta |V| puntos sin cubrir
    (eta |X| con multiplicative=True).
    """
    members = _members_in(X, V, 'X')
    eta = Fraction(eta)
    stop_at = eta * (members.size if multiplicative else V.size)
    pieces, rest = _one_set_points(members, V, r, Fraction(epsilon), stop_at)
    logger.info(f"one-set uniformization: {len(pieces)} pieces, {rest.size} points left")
    return [(p.space, F2Set.from_members(X.ambient_dim, p.members)) for p in pieces]


def one_set_piece_bound(r, epsilon, eta):
    """2^{(1 + r/eps) log2(1/eta)}: cota para la cantidad de piezas."""
    return 2.0 ** ((1 + r / float(epsilon)) * _log2_inv(eta))


# Dos conjuntos ---------------------------------------------------------------

@dataclass
class TwoSetPiece:
    space: AffineSubspace
    x_shift: int
    y_shift: int
    x_members: np.ndarray
    y_members: np.ndarray
    x_verdict: object
    y_verdict: object
    level: int = 0

    @property
    def Xi(self):
        return F2Set.from_members(self.space.ambient_dim, self.x_members)

    @property
    def Yi(self):
        return F2Set.from_members(self.space.ambient_dim, self.y_members)

    def sort_key(self):
        return (self.space.sort_key(), self.x_shift, self.y_shift)


def _two_set_points(xs, ys, W, x0, y0, r, epsilon, eta, level_cap):
    """
    Lista de trabajo hasta el punto fijo: uniformizar X en x0+W, partir Y en los
    cosets de cada V_j y uniformizar cada parte; si el subespacio de Y es mas chico,
    partir X_j en sus cosets y volver a encolar. El nivel l usa eta / 2^(l+2).
    """
    items = deque([(W, x0, y0, xs, ys, 0)])
    out = []
    while items:
        space, xo, yo, xpart, ypart, level = items.popleft()
        if xpart.size == 0 or ypart.size == 0:
            continue
        if level > level_cap:
            raise IncompleteDecompositionError(
                f"two-set uniformization passed {level_cap} refinement levels", partial=out)
        eta_level = eta / (1 << (level + 2))
        xpieces, _ = _one_set_points(xpart, space.translate(xo), r, epsilon,
                                     eta_level * xpart.size)
        for xp in xpieces:
            Wj = xp.space.direction()
            ykeys = Wj.coset_keys(ypart)
            for key in np.unique(ykeys):
                chunk = ypart[ykeys == key]
                ypieces, _ = _one_set_points(chunk, Wj.translate(int(key)), r, epsilon,
                                             eta_level * chunk.size)
                for yp in ypieces:
                    Wk = yp.space.direction()
                    if Wk == Wj:
                        out.append(TwoSetPiece(Wj, xp.space.offset, yp.space.offset,
                                               xp.members, yp.members, xp.verdict,
                                               yp.verdict, level))
                        continue
                    xkeys = Wk.coset_keys(xp.members)
                    for xkey in np.unique(xkeys):
                        items.append((Wk, int(xkey), yp.space.offset,
                                      xp.members[xkeys == xkey], yp.members, level + 1))
        logger.debug(f"two-set worklist: level {level}, {len(items)} queued, {len(out)} pieces")
    out.sort(key=TwoSetPiece.sort_key)
    return out


def uniformize_two_sets(X, Y, V, r, epsilon, eta):
    """
    Rectangulos X_i x Y_i disjuntos dentro de X x Y, con X_i, Y_i dispersos en
    x_i + V_i, y_i + V_i, cubriendo al menos (1 - eta)|X x Y|.
    """
    xs = _members_in(X, V, 'X')
    ys = _members_in(Y, V, 'Y')
    epsilon = Fraction(epsilon)
    eta = Fraction(eta)
    cap = 16 * math.ceil(_log2_inv(eta) / float(epsilon))
    pieces = _two_set_points(xs, ys, V.direction(), V.offset, V.offset, r, epsilon, eta, cap)
    covered = sum(p.x_members.size * p.y_members.size for p in pieces)
    logger.info(f"two-set uniformization: {len(pieces)} pieces covering {covered} of "
                f"{xs.size * ys.size} pairs")
    return pieces


def verify_two_sets(pieces, X, Y, V, r, epsilon, eta):
    """Contencion, certificados, disyuncion de rectangulos y cobertura (1 - eta)."""
    n = V.ambient_dim
    failures = []
    seen = np.zeros(1 << (2 * n), dtype=bool) if n <= 12 else None
    covered = 0
    for idx, p in enumerate(pieces):
        label = f"piece {idx} (dim {p.space.dim})"
        for name, members, parent, shift in (('X', p.x_members, X, p.x_shift),
                                             ('Y', p.y_members, Y, p.y_shift)):
            space = p.space.translate(shift)
            if not (np.all(space.contains_array(members)) and np.all(parent.membership[members])):
                failures.append(f"{label}: {name} not contained in its coset of the parent set")
                continue
            if not V.direction().contains_subspace(p.space):
                failures.append(f"{label}: subspace not inside V")
            if not certify_points(members, space, r, epsilon).passed:
                failures.append(f"{label}: {name} fails the ({r}, {epsilon}) spread check")
        cells = ((p.x_members[:, None] << n) | p.y_members[None, :]).ravel()
        if seen is not None:
            if seen[cells].any():
                failures.append(f"{label}: rectangle overlaps an earlier piece")
            seen[cells] = True
        covered += cells.size
    total = X.size * Y.size
    if (total - covered) * Fraction(eta).denominator > Fraction(eta).numerator * total:
        failures.append(f"coverage {covered} of {total} pairs is below 1 - eta")
    return VerificationReport(not failures, failures, {'total': total, 'covered': covered})


# Tres conjuntos -------------------------------------------------------------

@dataclass
class DecompositionPiece:
    """
    (V_i, x_i, y_i, X_i, Y_i, Z_i): X_i en x_i+V_i, Y_i en y_i+V_i y Z_i en
    x_i+y_i+V_i. `space` es la parte lineal.
    """
    space: AffineSubspace
    x_shift: int
    y_shift: int
    x_members: np.ndarray
    y_members: np.ndarray
    z_members: np.ndarray
    certificates: Dict[str, object] = field(default_factory=dict)
    good: bool = False
    depth: int = 0
    pair_count: int = 0
    r: int = 0
    epsilon: Fraction = Fraction(0)

    @property
    def ambient_dim(self):
        return self.space.ambient_dim

    @property
    def Xi(self):
        return F2Set.from_members(self.ambient_dim, self.x_members)

    @property
    def Yi(self):
        return F2Set.from_members(self.ambient_dim, self.y_members)

    @property
    def Zi(self):
        return F2Set.from_members(self.ambient_dim, self.z_members)

    def x_space(self):
        return self.space.translate(self.x_shift)

    def y_space(self):
        return self.space.translate(self.y_shift)

    def z_space(self):
        return self.space.translate(self.x_shift ^ self.y_shift)

    def sort_key(self):
        return (self.space.sort_key(), self.x_shift, self.y_shift, self.depth)

    def to_dict(self):
        return {
            'space': self.space.to_json(),
            'dim': self.space.dim,
            'x_shift': self.x_shift,
            'y_shift': self.y_shift,
            'X': self.x_members.tolist(),
            'Y': self.y_members.tolist(),
            'Z': self.z_members.tolist(),
            'pairs': self.pair_count,
            'good': self.good,
            'depth': self.depth,
            'r': self.r,
            'epsilon': str(self.epsilon),
            'certificates': {k: v.to_dict() for k, v in self.certificates.items()},
        }


@dataclass
class RoundResult:
    pieces: List[DecompositionPiece]
    good: List[int]
    total: int
    discarded: int
    demoted: int
    alpha: Fraction
    kappa: Optional[Fraction]
    round_codim: int
    warnings: List[str] = field(default_factory=list)

    @property
    def good_mass(self):
        return sum(self.pieces[i].pair_count for i in self.good)


def _certify(members, space, r, epsilon):
    return certify_points(members, space, r, epsilon)


def _hypothesis_warnings(epsilon, eta):
    notes = []
    if not epsilon < Fraction(1, 10):
        notes.append(f"epsilon = {epsilon} is not below 1/10; the round bounds are applied outside their hypothesis")
    if not eta < Fraction(1, 50):
        notes.append(f"eta = {eta} is not below 1/50; the round bounds are applied outside their hypothesis")
    for note in notes:
        logger.warning(note)
    return notes


def _round(W, x0, y0, xs, ys, zs, r, epsilon, eta, config, depth=0):
    n = W.ambient_dim
    total = count_pairs(xs, ys, zs, n)
    if total == 0:
        return RoundResult([], [], 0, 0, 0, Fraction(0), None, 0)
    alpha = Fraction(total, W.size * W.size)
    eta_alpha = eta * alpha
    if config.round_codim is not None:
        r0 = int(config.round_codim)
    else:
        r0 = r + math.ceil(r / float(epsilon) * _log2_inv(eta_alpha) - 1e-12)
    warnings = _hypothesis_warnings(epsilon, eta)
    two_eps = epsilon * config.two_set_epsilon_factor
    cap = config.level_cap_factor * math.ceil(_log2_inv(eta_alpha) / float(two_eps))
    rectangles = _two_set_points(xs, ys, W, x0, y0, r0, two_eps, eta_alpha, cap)

    kappa = eta_alpha / 2
    for t in rectangles:
        kappa = min(kappa, Fraction(t.x_members.size * t.y_members.size, t.space.size ** 2))
    factor = 1 - Fraction(4, 10) * epsilon

    pieces = []
    demoted = 0
    for t in rectangles:
        z_space = t.space.translate(t.x_shift ^ t.y_shift)
        z_t = zs[z_space.contains_array(zs)]
        if z_t.size == 0:
            continue
        zpieces, _ = _one_set_points(z_t, z_space, r, epsilon, eta_alpha * t.space.size)
        x_density = Fraction(t.x_members.size, t.space.size)
        y_density = Fraction(t.y_members.size, t.space.size)
        for zp in zpieces:
            sub = zp.space.direction()
            z0 = zp.space.offset
            xkeys = sub.coset_keys(t.x_members)
            ykeys = sub.coset_keys(t.y_members)
            threshold = eta * eta * alpha * alpha * kappa * sub.size * sub.size
            for xkey in np.unique(xkeys):
                xkey = int(xkey)
                ykey = int(sub.coset_keys(np.array([xkey ^ z0]))[0])
                xp = t.x_members[xkeys == xkey]
                yp = t.y_members[ykeys == ykey]
                if yp.size == 0:
                    continue
                pairs = count_pairs(xp, yp, zp.members, n)
                if pairs < threshold or pairs == 0:
                    continue
                dense = (Fraction(xp.size, sub.size) >= factor * x_density
                         and Fraction(yp.size, sub.size) >= factor * y_density)
                certificates = {
                    'X': _certify(xp, sub.translate(xkey), r, epsilon),
                    'Y': _certify(yp, sub.translate(ykey), r, epsilon),
                    'Z': zp.verdict,
                }
                certified = all(v.passed for v in certificates.values())
                if dense and not certified:
                    demoted += 1
                pieces.append(DecompositionPiece(sub, xkey, ykey, xp, yp, zp.members,
                                                 certificates, dense and certified, depth,
                                                 pairs, r, epsilon))
    pieces.sort(key=DecompositionPiece.sort_key)
    good = [i for i, p in enumerate(pieces) if p.good]
    kept = sum(p.pair_count for p in pieces)
    result = RoundResult(pieces, good, total, total - kept, demoted, alpha, kappa, r0, warnings)
    logger.info(f"round depth {depth}: |S|={total}, {len(pieces)} pieces, {len(good)} good, "
                f"discarded {total - kept}, good mass {result.good_mass}")
    return result


def _round_inputs(X, Y, Z, V):
    xs = _members_in(X, V, 'X')
    ys = _members_in(Y, V, 'Y')
    zs = _members_in(Z, V.direction(), 'Z')
    return xs, ys, zs


def uniformize_three_sets_round(X, Y, Z, V, r, epsilon, eta, config=None):
    """
    Una ronda: X x Y en dos conjuntos, cada Z_t en un conjunto, refinamiento por
    cosets de V_{t,t'} y los dos filtros (tamano y densidad).
    """
    config = config or UniformizeConfig()
    xs, ys, zs = _round_inputs(X, Y, Z, V)
    return _round(V.direction(), V.offset, V.offset, xs, ys, zs, int(r),
                  Fraction(epsilon), Fraction(eta), config)


# Recursion ------------------------------------------------------------------

@dataclass
class DecompositionResult:
    pieces: List[DecompositionPiece]
    good: List[int]
    total: int
    covered: int
    remainder: int
    params: dict
    log: pd.DataFrame
    warnings: List[str] = field(default_factory=list)

    def to_dict(self):
        return {
            'params': self.params,
            'total': self.total,
            'covered': self.covered,
            'remainder': self.remainder,
            'good': list(self.good),
            'min_dim': min((p.space.dim for p in self.pieces), default=None),
            'pieces': [p.to_dict() for p in self.pieces],
            'rounds': self.log.to_dict(orient='records'),
            'warnings': list(self.warnings),
        }


def recursion_depth(eta):
    return math.ceil(20 * _log2_inv(eta) - 1e-12)


def uniformize_recursive(X, Y, Z, V, r, epsilon, eta, config=None):
    """
    Rondas sucesivas sobre las piezas no buenas, cada una con (r, eps/10, eta^2/100),
    hasta la profundidad L; lo que queda al final se descarta.
    """
    config = config or UniformizeConfig()
    r = int(r)
    epsilon = Fraction(epsilon)
    eta = Fraction(eta)
    xs, ys, zs = _round_inputs(X, Y, Z, V)
    n = V.ambient_dim
    round_eps = epsilon * config.recursion_epsilon_factor
    round_eta = eta ** config.recursion_eta_power / config.recursion_eta_divisor
    depth_cap = config.depth if config.depth is not None else recursion_depth(eta)
    params = {'r': r, 'epsilon': epsilon, 'eta': eta, 'round_epsilon': round_eps,
              'round_eta': round_eta, 'depth': depth_cap, 'config': config.echo()}
    total = count_pairs(xs, ys, zs, n)
    frontier = [(V.direction(), V.offset, V.offset, xs, ys, zs)]
    kept = []
    rows = []
    warnings = []
    for depth in range(depth_cap):
        if not frontier or total == 0:
            break
        following = []
        for W, x0, y0, px, py, pz in frontier:
            try:
                rr = _round(W, x0, y0, px, py, pz, r, round_eps, round_eta, config, depth)
            except IncompleteDecompositionError as exc:
                partial = _result(kept, total, params, rows, warnings)
                raise IncompleteDecompositionError(str(exc), partial=partial) from exc
            warnings.extend(w for w in rr.warnings if w not in warnings)
            for p in rr.pieces:
                if p.good:
                    kept.append(p)
                else:
                    following.append((p.space, p.x_shift, p.y_shift,
                                      p.x_members, p.y_members, p.z_members))
            rows.append({'depth': depth, 'input_pairs': rr.total, 'pieces': len(rr.pieces),
                         'good': len(rr.good), 'discarded': rr.discarded,
                         'demoted': rr.demoted, 'round_codim': rr.round_codim})
        frontier = following
    result = _result(kept, total, params, rows, warnings)
    if result.remainder * eta.denominator > eta.numerator * total:
        raise IncompleteDecompositionError(
            f"remainder {result.remainder} exceeds eta * |S| = {float(eta * total):.1f}",
            partial=result)
    return result


def _result(kept, total, params, rows, warnings):
    kept = sorted(kept, key=DecompositionPiece.sort_key)
    covered = sum(p.pair_count for p in kept)
    log = pd.DataFrame(rows, columns=['depth', 'input_pairs', 'pieces', 'good',
                                      'discarded', 'demoted', 'round_codim'])
    return DecompositionResult(kept, list(range(len(kept))), total, covered,
                               total - covered, params, log, list(warnings))


# Verificacion ---------------------------------------------------------------

class VerificationReport(NamedTuple):
    ok: bool
    failures: list
    checks: dict

    def to_dict(self):
        return {'ok': self.ok, 'failures': list(self.failures), 'checks': dict(self.checks)}


def verify_decomposition(result, X, Y, Z, V, eta=None):
    """
    Rehace desde cero contencion, certificados, disyuncion de los S(X_i,Y_i,Z_i) y
    cobertura. Cada falla nombra la pieza.

    Parámetros:
    eta: cota de cobertura (1 - eta)|S|; por defecto la de result.params. Sin eta
    solo se chequea la consistencia de lo registrado.
    """
    n = V.ambient_dim
    failures = []
    checks = {'containment': 0, 'certificates': 0, 'pieces': len(result.pieces)}
    all_keys = []
    owners = []
    for idx, p in enumerate(result.pieces):
        label = f"piece {idx} (dim {p.space.dim}, x={p.x_shift}, y={p.y_shift})"
        for name, members, parent, space in (('X', p.x_members, X, p.x_space()),
                                             ('Y', p.y_members, Y, p.y_space()),
                                             ('Z', p.z_members, Z, p.z_space())):
            if members.size and not (np.all(space.contains_array(members))
                                     and np.all(parent.membership[members])):
                failures.append(f"{label}: {name} not contained in its coset of the parent set")
            else:
                checks['containment'] += 1
        if not V.direction().contains_subspace(p.space):
            failures.append(f"{label}: subspace not inside V")
        if p.good:
            for name, members, space in (('X', p.x_members, p.x_space()),
                                         ('Y', p.y_members, p.y_space()),
                                         ('Z', p.z_members, p.z_space())):
                if members.size == 0:
                    failures.append(f"{label}: {name} is empty")
                    continue
                if not np.all(space.contains_array(members)):
                    continue
                verdict = certify_points(members, space, p.r, p.epsilon)
                if verdict.passed:
                    checks['certificates'] += 1
                else:
                    failures.append(f"{label}: {name} fails the ({p.r}, {p.epsilon}) spread check")
        keys = pair_keys(p.x_members, p.y_members, p.z_members, n)
        if keys.size != p.pair_count:
            failures.append(f"{label}: recorded {p.pair_count} pairs, found {keys.size}")
        all_keys.append(keys)
        owners.append(np.full(keys.size, idx, dtype=np.int64))
    keys = np.concatenate(all_keys) if all_keys else np.zeros(0, dtype=np.int64)
    owner = np.concatenate(owners) if owners else np.zeros(0, dtype=np.int64)
    order = np.argsort(keys, kind='stable')
    keys, owner = keys[order], owner[order]
    dup = np.flatnonzero(keys[1:] == keys[:-1])
    for k in dup[:10]:
        failures.append(f"pieces {int(owner[k])} and {int(owner[k + 1])} overlap at pair key {int(keys[k])}")
    if dup.size > 10:
        failures.append(f"{dup.size - 10} more overlapping pairs")
    xs = keys >> n
    ys = keys & ((1 << n) - 1)
    outside = ~(X.membership[xs] & Y.membership[ys] & Z.membership[xs ^ ys])
    if outside.any():
        failures.append(f"{int(outside.sum())} piece pairs fall outside S(X,Y,Z)")
    total = count_pairs(X.members, Y.members, Z.members, n)
    unique = int(np.unique(keys).size)
    checks.update({'total': total, 'covered': unique, 'remainder': total - unique,
                   'disjoint': dup.size == 0})
    if eta is None:
        eta = result.params.get('eta')
    if eta is not None:
        eta = Fraction(eta)
        checks['eta'] = eta
        if (total - unique) * eta.denominator > eta.numerator * total:
            failures.append(f"coverage below 1 - eta: covered {unique} of {total}, eta = {eta}")
    consistent = total == result.total and (dup.size or unique + result.remainder == total)
    if not consistent:
        failures.append(f"coverage mismatch: |S|={total}, covered {unique}, "
                        f"recorded remainder {result.remainder}")
    report = VerificationReport(not failures, failures, checks)
    if failures:
        logger.warning(f"decomposition verification failed: {failures[:3]}")
    return report
