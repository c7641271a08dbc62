import datetime
import json
import logging
import os
from fractions import Fraction

import numpy as np
import pandas as pd

from libs.errors import RejectedInputError
from libs.f2core import F2Set, load_set

LOG_FORMAT = '%(asctime)s:%(levelname)s:%(name)s:%(message)s'


class Helper:
    def __init__(self, seed=None):
        self.seed = seed

    @staticmethod
    def setup_logging(name, log_dir='logs', level=logging.DEBUG):
        """
        Log por corrida en logs/<name>-<timestamp>.txt.

        Parámetros:
          name (str): prefijo del archivo.
          level (int): nivel del logger raiz.
        Retorna:
          str: ruta del archivo de log.
        """
        os.makedirs(log_dir, exist_ok=True)
        timestamp = datetime.datetime.now().strftime("%Y-%m-%d-%H.%M.%S")
        name_file = os.path.join(log_dir, f"{name}-{timestamp}.txt")
        logging.basicConfig(filename=name_file, level=level, format=LOG_FORMAT)
        return name_file

    @staticmethod
    def level_from_verbosity(verbosity):
        #absl: 0 = INFO, 1 = DEBUG, -1 = WARNING, -2 = ERROR
        if verbosity >= 1:
            return logging.DEBUG
        if verbosity == 0:
            return logging.INFO
        if verbosity == -1:
            return logging.WARNING
        return logging.ERROR

    @staticmethod
    def task_rng(seed, task):
        """Generador hijo de la tarea `task` de una corrida con semilla `seed`."""
        if seed is None:
            raise RejectedInputError("a seed is required for this stochastic path")
        return np.random.default_rng(np.random.SeedSequence([int(seed), int(task)]))

    @staticmethod
    def require_seed(seed, flag='--seed'):
        if seed is None:
            raise RejectedInputError(f"missing {flag}: every stochastic run needs an explicit seed")
        return int(seed)

    @staticmethod
    def require_param(value, flag):
        if value is None:
            raise RejectedInputError(f"missing {flag}")
        return value

    @staticmethod
    def parse_fraction(text, name='value'):
        if text is None:
            raise RejectedInputError(f"missing {name}")
        try:
            return Fraction(str(text))
        except (ValueError, ZeroDivisionError) as exc:
            raise RejectedInputError(f"{name}: cannot parse {text!r} as a rational") from exc

    @staticmethod
    def to_jsonable(value):
        """Fracciones como "p/q", arreglos de numpy como listas, tablas de pandas como registros."""
        if isinstance(value, Fraction):
            return str(value)
        if isinstance(value, dict):
            return {str(k): Helper.to_jsonable(v) for k, v in value.items()}
        if isinstance(value, (list, tuple)):
            return [Helper.to_jsonable(v) for v in value]
        if isinstance(value, np.ndarray):
            return [Helper.to_jsonable(v) for v in value.tolist()]
        if isinstance(value, pd.DataFrame):
            return [Helper.to_jsonable(r) for r in value.to_dict(orient='records')]
        if isinstance(value, pd.Series):
            return {str(k): Helper.to_jsonable(v) for k, v in value.items()}
        if isinstance(value, np.bool_):
            return bool(value)
        if isinstance(value, np.integer):
            return int(value)
        if isinstance(value, np.floating):
            return float(value)
        if hasattr(value, 'to_dict'):
            return Helper.to_jsonable(value.to_dict())
        return value

    @staticmethod
    def dumps(report):
        return json.dumps(Helper.to_jsonable(report), sort_keys=True, indent=2)

    def load_set_arg(self, text, n=None, flag='--set'):
        """
        Conjunto desde un flag: ruta a JSON o binario, 'full', o 'random:DENSITY:SEED'.
        Las dos ultimas formas necesitan --n.
        """
        if text is None:
            raise RejectedInputError(f"missing {flag}")
        text = str(text)
        if text == 'full' or text.startswith('random:'):
            if n is None:
                raise RejectedInputError(f"{flag}={text} needs --n")
            if text == 'full':
                return F2Set.full(int(n))
            parts = text.split(':')
            if len(parts) != 3:
                raise RejectedInputError(f"{flag} must be random:DENSITY:SEED, got {text!r}")
            density = self.parse_fraction(parts[1], flag)
            return F2Set.random(int(n), density, self.task_rng(int(parts[2]), 0))
        try:
            return load_set(text)
        except OSError as exc:
            raise RejectedInputError(f"{flag}: {exc}") from exc
