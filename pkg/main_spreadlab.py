"""
spreadlab: experimentos de dispersion y juegos repetidos.

  python main_spreadlab.py <subcomando> [--flags]

Subcomandos: spread-check, uniformize, square-cover, game-value, hard-coordinate,
concentration, appendix-check.
"""
import sys

from absl import app, flags

from lab_runner import LabRunner
from libs.config import MAX_PAIRS, MAX_TRIPLES, ExperimentConfig
from libs.functions import Helper

FLAGS = flags.FLAGS

#Globales
flags.DEFINE_integer('seed', None, 'Semilla explicita de 64 bits; obligatoria en corridas aleatorias.')
flags.DEFINE_string('out', None, 'Ruta del reporte; "json" o "csv" escriben en reports/<subcomando>.')
flags.DEFINE_enum('format', 'json', ['json', 'csv'], 'Formato del reporte.')
flags.DEFINE_integer('max_pairs', MAX_PAIRS, 'Presupuesto de pares (x,y) al construir S(X,Y,Z).')
flags.DEFINE_integer('max_triples', MAX_TRIPLES, 'Presupuesto |S| * 2^n del barrido de cuadrados.')
flags.DEFINE_integer('n', None, 'Dimension ambiente o numero de repeticiones.')

#Conjuntos: ruta JSON/.bin, "full" o "random:DENSITY:SEED"
flags.DEFINE_string('set', None, 'Conjunto A para spread-check.')
flags.DEFINE_string('space', None, 'Subespacio afin V en JSON; por defecto F_2^n.')
flags.DEFINE_string('x', None, 'Conjunto X.')
flags.DEFINE_string('y', None, 'Conjunto Y.')
flags.DEFINE_string('z', None, 'Conjunto Z.')
flags.DEFINE_string('e', None, 'Evento E del primer jugador.')
flags.DEFINE_string('f', None, 'Evento F del segundo jugador.')
flags.DEFINE_string('g', None, 'Evento G del tercer jugador.')

#Dispersion y descomposicion
flags.DEFINE_integer('r', None, 'Codimension maxima r.')
flags.DEFINE_string('eps', None, 'epsilon racional, p.ej. 1/4 o 0.25.')
flags.DEFINE_string('eta', None, 'eta racional de la descomposicion.')
flags.DEFINE_string('mode', 'exact', 'exact o sampled:COUNT:SEED.')
flags.DEFINE_boolean('extract', False, 'spread-check: extraer un subconjunto disperso.')
flags.DEFINE_string('depth', 'auto', 'uniformize: profundidad de la recursion o auto.')
flags.DEFINE_integer('round_codim', None, 'uniformize: codimension fija de cada ronda.')
flags.DEFINE_boolean('conditional', False, 'square-cover: distancias ||mu - nu_i||_1.')

#Juegos
flags.DEFINE_string('game', None, 'Juego en JSON; por defecto GHZ.')
flags.DEFINE_integer('reps', 1, 'game-value: repeticiones en paralelo.')
flags.DEFINE_string('battery', 'default', 'Bateria de estrategias: default, small o random.')
flags.DEFINE_integer('trials', None, 'Entradas muestreadas por estrategia.')
flags.DEFINE_string('subset_sizes', None, 'hard-coordinate: tamanos t separados por comas.')
flags.DEFINE_string('transcript_coords', None, 'hard-coordinate: coordenadas de la transcripcion.')
flags.DEFINE_string('strategy', 'product_optimal', 'hard-coordinate: estrategia de la transcripcion.')
flags.DEFINE_boolean('squares', False, 'hard-coordinate: barrido exhaustivo de cuadrados.')

#Apendice
flags.DEFINE_enum('which', 'entropy', ['entropy', 'marginal', 'chernoff', 'prefix'],
                  'appendix-check: que chequeo correr.')
flags.DEFINE_string('density', None, 'appendix-check: densidad del T aleatorio.')
flags.DEFINE_string('mu', None, 'appendix-check chernoff: media por coordenada.')
flags.DEFINE_string('delta', None, 'appendix-check chernoff: desvio relativo.')

SUBCOMMAND_FLAGS = {
    'spread-check': ['n', 'set', 'space', 'x', 'y', 'z', 'r', 'eps', 'mode', 'extract'],
    'uniformize': ['n', 'x', 'y', 'z', 'space', 'r', 'eps', 'eta', 'depth', 'round_codim'],
    'square-cover': ['n', 'x', 'y', 'z', 'conditional'],
    'game-value': ['game', 'reps'],
    'hard-coordinate': ['game', 'n', 'e', 'f', 'g', 'battery', 'r', 'eps', 'trials',
                        'subset_sizes', 'transcript_coords', 'strategy', 'squares'],
    'concentration': ['game', 'n', 'eps', 'trials', 'battery'],
    'appendix-check': ['which', 'n', 'density', 'mu', 'delta', 'trials'],
}


def build_config(subcommand, values):
    """ExperimentConfig a partir de los flags del subcomando."""
    names = SUBCOMMAND_FLAGS.get(subcommand, [])
    params = {name: values[name].value for name in names}
    out, fmt = values['out'].value, values['format'].value
    if out in ('json', 'csv'):
        fmt = out
        out = f"reports/{subcommand}.{fmt}"
    return ExperimentConfig(subcommand=subcommand, params=params, seed=values['seed'].value,
                            max_pairs=values['max_pairs'].value,
                            max_triples=values['max_triples'].value,
                            out=out, fmt=fmt, verbosity=values['verbosity'].value)


def main(argv):
    if len(argv) != 2:
        print(f"usage: {argv[0]} <{'|'.join(SUBCOMMAND_FLAGS)}> [--flags]", file=sys.stderr)
        return 1
    subcommand = argv[1]
    config = build_config(subcommand, FLAGS)
    Helper.setup_logging(f"spreadlab-{subcommand}", level=Helper.level_from_verbosity(config.verbosity))
    runner = LabRunner(config.seed)
    return runner.run(config)


if __name__ == "__main__":
    app.run(main)
