import logging
import os
import sys
import time

import pandas as pd

from general_lab import SpreadLab
from libs.config import SCHEMA_VERSION, SPREADLAB_VERSION
from libs.errors import (BudgetExceededError, IncompleteDecompositionError, PostconditionError,
                         SpreadLabError)
from libs.functions import Helper

logger = logging.getLogger(__name__)


class LabRunner(SpreadLab):
    """
    Corre un experimento a partir de un ExperimentConfig y escribe el reporte.

    JSON: {schema_version, version, config, wall_time, status, result | error}.
    CSV: la tabla del experimento, columnas fijas por subcomando.
    La ultima linea de stdout es el resultado (o el error).
    """

    def __init__(self, seed=None):
        super(LabRunner, self).__init__(seed)
        self.last_report = None

    def run(self, config):
        start = time.perf_counter()
        table = None
        try:
            result, table, line = self.get_specific_experiment(config, config.subcommand)
            status, code = 'ok', 0
        except SpreadLabError as exc:
            logger.error(f"{type(exc).__name__}: {exc}")
            result = self._error_payload(exc)
            status, code, line = 'error', exc.exit_code, f"error: {exc}"
        report = {
            'schema_version': SCHEMA_VERSION,
            'version': SPREADLAB_VERSION,
            'config': config.echo(),
            'status': status,
            'exit_code': code,
            'wall_time': round(time.perf_counter() - start, 6),
        }
        report['result' if status == 'ok' else 'error'] = result
        self.last_report = report
        self._write(config, report, table)
        if code:
            print(line, file=sys.stderr)
        else:
            print(line)
        return code

    @staticmethod
    def _error_payload(exc):
        payload = {'type': type(exc).__name__, 'message': str(exc), 'exit_code': exc.exit_code}
        if isinstance(exc, BudgetExceededError):
            payload.update({'needed': exc.needed, 'budget': exc.budget, 'advice': exc.advice})
        elif isinstance(exc, IncompleteDecompositionError) and exc.partial is not None:
            payload['partial'] = exc.partial
        elif isinstance(exc, PostconditionError) and exc.report is not None:
            payload['report'] = exc.report
        return payload

    def _write(self, config, report, table):
        if not config.out:
            return
        folder = os.path.dirname(config.out)
        if folder:
            os.makedirs(folder, exist_ok=True)
        if config.fmt == 'csv':
            frame = table if isinstance(table, pd.DataFrame) else pd.DataFrame()
            frame = frame.apply(lambda col: col.map(Helper.to_jsonable))
            frame.to_csv(config.out, index=False)
        else:
            with open(config.out, 'w', encoding='utf-8') as f:
                f.write(Helper.dumps(report))
                f.write('\n')
        logger.info(f"report written to {config.out}")
