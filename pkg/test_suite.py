"""
Tests for the suite runner, report writer and command line
"""

import json
import os
from fractions import Fraction

import pytest

from cli import main
from config import CSV_COLUMNS, EXIT_FAIL, EXIT_PASS, EXIT_USAGE, REPORT_SCHEMA
from core import RatioBlockError
from generators import power_sequence
from report import emit, timings_path
from suite_runner import (ANCHORS, Check, MalformedSuite, SuiteSpec, builtin_suite, load_suite, run_check,
                          run_suite)


def _suite_file(tmp_path, checks, name='custom'):
    path = tmp_path / "suite.json"
    path.write_text(json.dumps({'name': name, 'checks': checks}))
    return str(path)


SQUARES_MEAN = {
    'name': 'squares_mean', 'anchor': 'mean-ratio', 'family': 'power', 'params': {'q': '1/2'},
    'statistic': 'mean_ratio', 'options': {'n': '20000'}, 'expected': '1/3', 'tolerance': '0.005',
}


# ---------------------------------------------------------------------------
# Checks
# ---------------------------------------------------------------------------

def test_value_check_passes_and_fails():
    good = run_check(Check('good', 'oracle', lambda: Fraction(1, 3), Fraction(1, 3), Fraction(1, 100)))
    assert good.passed and good.reason is None
    bad = run_check(Check('bad', 'oracle', lambda: 1, Fraction(2), Fraction(1, 10)))
    assert not bad.passed and bad.computed == 1


def test_exception_becomes_failure():
    result = run_check(Check('boom', 'oracle', lambda: 1 // 0, Fraction(0), Fraction(1)))
    assert not result.passed
    assert result.reason.startswith('ZeroDivisionError')


def test_predicate_check_keeps_witnesses():
    result = run_check(Check('p', 'oracle', lambda: (False, [3, Fraction(1, 2)]), kind='predicate'))
    assert not result.passed
    assert result.witnesses == ('3', '1/2')


@pytest.mark.parametrize("check", [
    Check('', 'oracle', lambda: 0, 0, Fraction(1)),
    Check('x', 'oracle', lambda: 0, 0, Fraction(0)),
    Check('x', 'oracle', lambda: 0),
    Check('x', 'oracle', lambda: 0, kind='table'),
])
def test_malformed_checks(check):
    with pytest.raises(MalformedSuite):
        check.validate()


def test_duplicate_names_rejected():
    check = Check('same', 'oracle', lambda: (True, ()), kind='predicate')
    with pytest.raises(MalformedSuite):
        SuiteSpec('dup', (check, check)).validate()


# ---------------------------------------------------------------------------
# Suites
# ---------------------------------------------------------------------------

def test_empty_suite_passes():
    report = run_suite(SuiteSpec('empty'), verbose=False)
    assert report.generate_report()['total'] == 0
    assert report.all_passed


def test_threaded_run_keeps_suite_order():
    checks = tuple(Check(f'c{i}', 'oracle', lambda i=i: Fraction(i), Fraction(i), Fraction(1, 2)) for i in range(8))
    report = run_suite(SuiteSpec('order', checks), jobs=4, verbose=False)
    assert [r.name for r in report.ordered] == [f'c{i}' for i in range(8)]
    assert report.passed == 8


def test_json_suite_file(tmp_path):
    spec = load_suite(_suite_file(tmp_path, [SQUARES_MEAN]))
    report = run_suite(spec, verbose=False)
    obj = report.generate_report()
    assert obj['schema'] == REPORT_SCHEMA
    assert obj['checks'][0]['pass'] is True
    assert obj['checks'][0]['expected'] == {'exact': '1/3', 'decimal': 1 / 3}


def test_json_suite_with_reduction(tmp_path):
    entry = {'name': 'powers_dispersion', 'family': 'geometric', 'params': {'ratio': '2'},
             'statistic': 'dispersion', 'options': {'n': '60', 'reduce': 'inf'},
             'expected': '1/2', 'tolerance': '0.01', 'anchor': 'dispersion'}
    report = run_suite(load_suite(_suite_file(tmp_path, [entry])), verbose=False)
    assert report.all_passed


@pytest.mark.parametrize("checks", [
    [{'name': 'x', 'family': 'power', 'statistic': 'mean_ratio', 'expected': '1/3'}],
    [dict(SQUARES_MEAN, statistic='median')],
    [dict(SQUARES_MEAN, options={'n': '10', 'reduce': 'mode'})],
    [SQUARES_MEAN, SQUARES_MEAN],
])
def test_malformed_suite_files(tmp_path, checks):
    with pytest.raises(MalformedSuite):
        load_suite(_suite_file(tmp_path, checks))


def test_unreadable_suite_file(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    with pytest.raises(MalformedSuite):
        load_suite(str(path))
    with pytest.raises(MalformedSuite):
        load_suite(str(tmp_path / "missing.json"))


def test_builtin_anchors_are_known():
    spec = builtin_suite()
    spec.validate()
    assert {c.anchor for c in spec.checks} == set(ANCHORS)


@pytest.mark.skipif(not os.environ.get('RATIOBLOCK_FULL_SUITE'), reason="set RATIOBLOCK_FULL_SUITE=1 to run")
def test_builtin_suite_passes():
    report = run_suite(builtin_suite(), jobs=2, verbose=False)
    assert report.all_passed, [r.name for r in report.ordered if not r.passed]


# ---------------------------------------------------------------------------
# Report output
# ---------------------------------------------------------------------------

def _mixed_report():
    checks = (Check('ok', 'oracle', lambda: Fraction(1, 2), Fraction(1, 2), Fraction(1, 100)),
              Check('off', 'oracle', lambda: 0.25, Fraction(1, 2), Fraction(1, 100)))
    return run_suite(SuiteSpec('mixed', checks), verbose=False)


def test_json_report_is_deterministic(tmp_path):
    first = emit(_mixed_report(), 'json', str(tmp_path / "a.json"))
    second = emit(_mixed_report(), 'json', str(tmp_path / "b.json"))
    with open(first) as f, open(second) as g:
        assert f.read() == g.read()
    assert os.path.exists(timings_path(first))


def test_csv_and_text_reports(tmp_path):
    report = _mixed_report()
    csv_path = emit(report, 'csv', str(tmp_path / "r.csv"))
    with open(csv_path) as f:
        lines = f.read().splitlines()
    assert lines[0] == ','.join(CSV_COLUMNS)
    assert lines[1] == 'ok,1/2,1/2,1/100,true'
    assert lines[2].endswith(',false')
    text = report.render('text').splitlines()
    assert text[0].startswith('✓ ok')
    assert text[1].startswith('✗ off')
    assert text[-1] == '1/2 checks passed'
    with pytest.raises(ValueError):
        report.render('xml')


def test_emit_wraps_write_errors(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    with pytest.raises(RatioBlockError):
        emit(_mixed_report(), 'json', str(blocker / "report.json"))


# ---------------------------------------------------------------------------
# Command line
# ---------------------------------------------------------------------------

def test_cli_gen_prints_json_lines(capsys):
    assert main(['gen', '--family', 'power', '--param', 'q=1/2', '--n', '5']) == EXIT_PASS
    assert capsys.readouterr().out.split() == ['"1"', '"4"', '"9"', '"16"', '"25"']


def test_cli_gen_range_as_json(capsys):
    assert main(['--json', 'gen', '--family', 'factorial', '--lo', '20', '--hi', '30']) == EXIT_PASS
    obj = json.loads(capsys.readouterr().out)
    assert obj['elements'] == [str(a) for a in range(25, 31)]


def test_cli_gen_without_range_emits_the_descriptor(capsys):
    assert main(['gen', '--family', 'power', '--param', 'q=1/2']) == EXIT_PASS
    obj = json.loads(capsys.readouterr().out)
    assert obj == json.loads(json.dumps(power_sequence(Fraction(1, 2)).to_json()))
    assert main(['gen', '--family', 'nolim', '--param', 'p=0', '--param', 'q=1/2', '--n', '5']) == EXIT_PASS
    assert len(capsys.readouterr().out.split()) == 5


def test_cli_saved_descriptor_feeds_other_commands(tmp_path, capsys):
    path = str(tmp_path / "squares.json")
    assert main(['gen', '--family', 'power', '--param', 'q=1/2', '--descriptor', path, '--n', '1']) == EXIT_PASS
    capsys.readouterr()
    assert main(['analyze', 'mean_ratio', '--in', path, '--n', '20000', '--json']) == EXIT_PASS
    obj = json.loads(capsys.readouterr().out)
    assert set(obj) >= {'checkpoints', 'inf', 'sup', 'verdict'}
    assert obj['limit']['decimal'] == pytest.approx(1 / 3, abs=0.005)
    assert main(['ratioset', '--in', path, '--k', '2', '--bound', '10000', '--grid', '8', '--json']) == EXIT_PASS
    assert json.loads(capsys.readouterr().out)['hit_fraction'] == 1.0


def test_cli_usage_errors(capsys):
    assert main(['gen', '--family', 'power', '--param', 'q=3/2', '--n', '3']) == EXIT_USAGE
    assert main(['gen', '--family', 'power', '--lo', '3']) == EXIT_USAGE
    assert main(['gen', '--n', '3']) == EXIT_USAGE
    assert main(['analyze', 'mean_ratio', '--family', 'power', '--param', 'q=1/2']) == EXIT_USAGE
    assert main(['analyze', 'step_df', '--family', 'power', '--param', 'q=1/2', '--n', '5']) == EXIT_USAGE
    assert main(['analyze', 'window_attaining', '--family', 'naturals', '--window', '5']) == EXIT_USAGE
    assert main(['gen', '--family', 'naturals', '--in', 'x.json', '--n', '3']) == EXIT_USAGE
    assert 'error:' in capsys.readouterr().err
    with pytest.raises(SystemExit) as excinfo:
        main(['transform'])
    assert excinfo.value.code == EXIT_USAGE


def test_cli_analyze_json(capsys):
    assert main(['--json', 'analyze', 'log_count', '--family', 'power', '--param', 'q=1/2',
                 '--grid', '10000,100000000']) == EXIT_PASS
    obj = json.loads(capsys.readouterr().out)
    assert obj['limit']['decimal'] == pytest.approx(0.5)


def test_cli_step_df_and_envelope(tmp_path, capsys):
    assert main(['analyze', 'step_df', '--family', 'naturals', '--n', '10', '--x', '1/2', '--json']) == EXIT_PASS
    assert json.loads(capsys.readouterr().out)['value']['exact'] == '2/5'
    prefix = str(tmp_path / "naturals.jsonl")
    assert main(['gen', '--family', 'naturals', '--n', '2000', '--out', prefix]) == EXIT_PASS
    capsys.readouterr()
    assert main(['analyze', 'df_envelope', '--prefix-in', prefix, '--window', '1000,2000',
                 '--grid', '1/4,1/2,3/4', '--json']) == EXIT_PASS
    obj = json.loads(capsys.readouterr().out)
    assert obj['singleton'] is True
    assert obj['model']['kind'] == 'power'


def test_cli_window_attaining_and_lemma1(capsys):
    assert main(['analyze', 'window_attaining', '--family', 'naturals', '--c', '1/2', '--gamma', '1/2',
                 '--window', '10,20', '--json']) == EXIT_PASS
    obj = json.loads(capsys.readouterr().out)
    assert obj['n'] == 19
    assert obj['residual']['exact'] == '1/38'
    assert main(['analyze', 'lemma1_check', '--family', 'power', '--param', 'q=1/2', '--c', '3/2',
                 '--window', '1000,100000']) == EXIT_PASS
    out = capsys.readouterr().out
    assert out.startswith('lemma1_check on power')
    assert 'sup_gap' in out


def test_cli_ratioset_text(capsys):
    assert main(['ratioset', '--family', 'geometric', '--param', 'ratio=4', '--k', '2', '--m', '10',
                 '--bound', str(4 ** 8)]) == EXIT_PASS
    out = capsys.readouterr().out
    assert 'hit fraction: 0.2000' in out
    assert 'largest empty box: 7/10' in out


def test_cli_report_exit_codes(tmp_path):
    passing = _suite_file(tmp_path, [SQUARES_MEAN])
    out = str(tmp_path / "report.json")
    assert main(['report', passing, '--format', 'json', '--out', out]) == EXIT_PASS
    with open(out) as f:
        assert json.load(f)['passed'] == 1
    failing = _suite_file(tmp_path, [dict(SQUARES_MEAN, expected='1/2')])
    assert main(['report', failing, '--format', 'csv', '--out', str(tmp_path / "r.csv")]) == EXIT_FAIL
    assert main(['report', str(tmp_path / "missing.json")]) == EXIT_USAGE


def test_cli_ndense_scan_json(capsys):
    assert main(['--json', 'probe', '--family', 'geometric', '--param', 'ratio=2', '--c', '6/5',
                 '--lo', '10', '--hi', '1000000']) == EXIT_PASS
    obj = json.loads(capsys.readouterr().out)
    assert obj['condition_i'] is False
    assert '1024' in obj['results'][0]['violations']
