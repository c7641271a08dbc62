from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, Optional

#Version de la libreria y del esquema de reportes
SPREADLAB_VERSION   = "0.1.0"
SCHEMA_VERSION      = 1

#Limites de los calculos exactos
MAX_AMBIENT_DIM          = 24
MAX_PAIRS                = 2**28   # pares (x,y) examinados al construir S(X,Y,Z)
MAX_TRIPLES              = 2**34   # trabajo |S|*2^n del barrido de cuadrados
MAX_NAIVE_TRIPLES        = 2**24   # barrido ingenuo 2^{3n}, solo para validar
MAX_CONSTRAINT_SYSTEMS   = 2**17   # sistemas de restricciones por codimension
MAX_ENUMERATED_SUBSPACES = 2**20   # subespacios afines materializados
MAX_PARITY_TABLE         = 2**24   # celdas de la tabla de paridades
MAX_RECTANGLE_SIDE       = 16      # lado menor para el chequeo exacto de rectangulos
MAX_STRATEGY_PAIRS       = 2**20   # pares (f,g) en la fuerza bruta del valor
MAX_EXACT_SUPPORT        = 2**24   # puntos del soporte de Q^n enumerados
MAX_TABLE_REPETITIONS    = 12      # n maximo para estrategias en tabla completa

#Chunking de arreglos temporales
CHUNK_CELLS = 2**22


@dataclass
class ExperimentConfig:
    """
    Configuracion de una corrida de la linea de comandos.

    Parametros:
      subcommand (str): nombre del experimento.
      params (dict): parametros propios del experimento, tal como se leyeron de los flags.
      seed (int | None): semilla explicita; nunca se usa el reloj.
      out (str | None): ruta del reporte.
      fmt (str): 'json' o 'csv'.
    """
    subcommand: str
    params: Dict[str, Any] = field(default_factory=dict)
    seed: Optional[int] = None
    max_pairs: int = MAX_PAIRS
    max_triples: int = MAX_TRIPLES
    out: Optional[str] = None
    fmt: str = 'json'
    verbosity: int = 0

    def echo(self):
        return {
            'subcommand': self.subcommand,
            'params': {k: v for k, v in sorted(self.params.items())},
            'seed': self.seed,
            'max_pairs': self.max_pairs,
            'max_triples': self.max_triples,
            'format': self.fmt,
        }


@dataclass
class UniformizeConfig:
    """
    Parametros de cada ronda de la descomposicion en tres conjuntos.

    Por defecto siguen la construccion original: codimension de la ronda
    r0 = r + ceil(r/eps * log2(1/(eta*alpha))), epsilon/10 para la descomposicion
    de X x Y, y recursion con (r, eps/10, eta^2/100) hasta profundidad
    ceil(20 log2(1/eta)).
    """
    round_codim: Optional[int] = None
    two_set_epsilon_factor: Fraction = Fraction(1, 10)
    recursion_epsilon_factor: Fraction = Fraction(1, 10)
    recursion_eta_power: int = 2
    recursion_eta_divisor: int = 100
    depth: Optional[int] = None
    level_cap_factor: int = 16

    def echo(self):
        return {
            'round_codim': self.round_codim,
            'two_set_epsilon_factor': str(self.two_set_epsilon_factor),
            'recursion_epsilon_factor': str(self.recursion_epsilon_factor),
            'recursion_eta_power': self.recursion_eta_power,
            'recursion_eta_divisor': self.recursion_eta_divisor,
            'depth': self.depth,
        }
