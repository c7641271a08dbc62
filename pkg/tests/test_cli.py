import json
from fractions import Fraction

import pandas as pd

from experiments.square_cover import ROW_COLUMNS
from lab_runner import LabRunner
from libs.config import SCHEMA_VERSION, ExperimentConfig


def _run(config, capsys):
    runner = LabRunner(config.seed)
    code = runner.run(config)
    captured = capsys.readouterr()
    return code, runner.last_report, captured


def _last_line(text):
    return text.strip().splitlines()[-1]


def test_game_value_prints_value(capsys):
    code, report, captured = _run(ExperimentConfig('game-value', {'game': None, 'reps': 1}), capsys)
    assert code == 0
    assert _last_line(captured.out) == '3/4'
    assert report['result']['value'] == Fraction(3, 4)
    assert report['status'] == 'ok'


def test_game_value_two_repetitions(capsys):
    code, report, captured = _run(ExperimentConfig('game-value', {'reps': 2}), capsys)
    assert code == 0
    assert report['result']['sandwich']['holds']
    assert Fraction(_last_line(captured.out)) == report['result']['value']


def test_missing_seed_is_rejected(capsys):
    for subcommand, params in (('concentration', {'n': 10, 'eps': '1/10', 'trials': 10}),
                               ('hard-coordinate', {'n': 4, 'e': 'full', 'f': 'full', 'g': 'full'})):
        code, report, captured = _run(ExperimentConfig(subcommand, params), capsys)
        assert code == 1
        assert '--seed' in _last_line(captured.err)
        assert report['error']['type'] == 'RejectedInputError'


def test_missing_parameter_is_rejected(capsys):
    params = {'n': 4, 'x': 'full', 'y': 'full', 'z': 'full', 'eps': '1/4', 'eta': '1/10'}
    code, _, captured = _run(ExperimentConfig('uniformize', params), capsys)
    assert code == 1
    assert '--r' in captured.err


def test_unknown_subcommand(capsys):
    code, _, _ = _run(ExperimentConfig('nope'), capsys)
    assert code == 1


def test_square_cover_full_space(capsys):
    code, report, _ = _run(ExperimentConfig('square-cover', {'n': 4}), capsys)
    assert code == 0
    assert all(v == 0 for v in report['result']['deviations'].values())
    assert report['result']['l1_mu_us'] == 0


def test_json_report_written(tmp_path, capsys):
    out = tmp_path / 'reports' / 'game.json'
    code, _, _ = _run(ExperimentConfig('game-value', {}, out=str(out)), capsys)
    assert code == 0
    data = json.loads(out.read_text())
    assert data['schema_version'] == SCHEMA_VERSION
    assert data['result']['value'] == '3/4'
    assert data['config']['subcommand'] == 'game-value'


def test_csv_report_columns(tmp_path, capsys):
    out = tmp_path / 'cover.csv'
    config = ExperimentConfig('square-cover', {'n': 3}, out=str(out), fmt='csv')
    code, _, _ = _run(config, capsys)
    assert code == 0
    frame = pd.read_csv(out)
    assert list(frame.columns) == ROW_COLUMNS
    assert frame.loc[0, 'size_s'] == 64


def test_budget_exit_code(tmp_path, capsys):
    out = tmp_path / 'budget.json'
    config = ExperimentConfig('square-cover', {'n': 6}, max_pairs=10, out=str(out))
    code, report, captured = _run(config, capsys)
    assert code == 2
    assert report['error']['budget'] == 10
    assert _last_line(captured.err).startswith('error:')
    assert json.loads(out.read_text())['exit_code'] == 2


def test_spread_check_full_set(capsys):
    params = {'set': 'full', 'n': 5, 'r': 2, 'eps': '1/4'}
    code, report, captured = _run(ExperimentConfig('spread-check', params), capsys)
    assert code == 0
    assert _last_line(captured.out) == 'passed'
    assert report['result']['kind'] == 'algebraic'


def test_uniformize_full_space(capsys):
    params = {'n': 4, 'x': 'full', 'y': 'full', 'z': 'full', 'r': 1, 'eps': '1/4', 'eta': '1/10'}
    code, report, captured = _run(ExperimentConfig('uniformize', params), capsys)
    assert code == 0
    assert report['result']['verification']['ok']
    assert _last_line(captured.out) == '1 pieces covering 256/256 pairs'


def test_appendix_prefix(capsys):
    code, report, captured = _run(ExperimentConfig('appendix-check', {'which': 'prefix', 'n': 8}),
                                  capsys)
    assert code == 0
    assert _last_line(captured.out) == 'agree'
    assert report['result']['cases'] == 36


def test_concentration_with_seed(capsys):
    params = {'n': 12, 'eps': '1/10', 'trials': 200, 'battery': 'random'}
    code, report, _ = _run(ExperimentConfig('concentration', params, seed=5), capsys)
    assert code == 0
    strategies = [row['strategy'] for row in report['result']['table'].to_dict(orient='records')]
    assert strategies[0] == 'product_optimal'
    assert strategies[-1] == 'min_value_product'


def _report_without_clock(path):
    data = json.loads(path.read_text())
    data.pop('wall_time')
    return data


def test_same_seed_same_report(tmp_path, capsys):
    params = {'n': 12, 'eps': '1/10', 'trials': 300, 'battery': 'random'}
    for name in ('a', 'b'):
        _run(ExperimentConfig('concentration', params, seed=9, out=str(tmp_path / f'{name}.json')),
             capsys)
        _run(ExperimentConfig('concentration', params, seed=9, out=str(tmp_path / f'{name}.csv'),
                              fmt='csv'), capsys)
    assert _report_without_clock(tmp_path / 'a.json') == _report_without_clock(tmp_path / 'b.json')
    assert (tmp_path / 'a.csv').read_bytes() == (tmp_path / 'b.csv').read_bytes()
    _run(ExperimentConfig('concentration', params, seed=10, out=str(tmp_path / 'c.json')), capsys)
    assert _report_without_clock(tmp_path / 'a.json') != _report_without_clock(tmp_path / 'c.json')


def test_same_seed_same_hard_coordinate_report(tmp_path, capsys):
    params = {'n': 4, 'e': 'random:1/2:1', 'f': 'random:1/2:2', 'g': 'full', 'battery': 'small',
              'subset_sizes': '1,2'}
    for name in ('a', 'b'):
        code, _, _ = _run(ExperimentConfig('hard-coordinate', params, seed=3,
                                           out=str(tmp_path / f'{name}.json')), capsys)
        assert code == 0
    assert _report_without_clock(tmp_path / 'a.json') == _report_without_clock(tmp_path / 'b.json')
