import logging
import sys
from pathlib import Path

import pytest

from risknet import RiskNet
from risknet.cli.main import start
from risknet.cli.utils import clean_args, run_overrides, split_list
from risknet.configs import config
from risknet.exceptions import ConfigException
from risknet.utils import EnvSettings, env_settings, read_env_file, resolve_cache_dir


def run_cli(monkeypatch, *argv) -> int:
    monkeypatch.setattr(sys, 'argv', ['risknet', *argv])
    with pytest.raises(SystemExit) as exit_info:
        start()
    return exit_info.value.code or 0


def test_clean_args():
    args = clean_args(['--input', 'prices.csv', '--format', 'csv', '--format', 'svg,dot', '--log-fits', '--seed', '3'])
    assert args == {'input': 'prices.csv', 'format': ['csv', 'svg', 'dot'], 'log-fits': True, 'seed': '3'}


def test_run_overrides():
    overrides = run_overrides({'seed': '7', 'trees': '2003-06-27, 2011-06-24', 'log-fits': True, 'jobs': '2'})
    assert overrides == {'seed': 7, 'jobs': 2, 'trees': ['2003-06-27', '2011-06-24'], 'log_fits': True}
    with pytest.raises(ValueError):
        run_overrides({'jobs': 'many'})
    with pytest.raises(ValueError):
        run_overrides({'input': True})
    assert split_list(None) is None


def test_help(monkeypatch, capsys):
    monkeypatch.setattr(sys, 'argv', ['risknet', '-h'])
    start()
    assert 'risknet run --input' in capsys.readouterr().out


def test_unknown_command(monkeypatch):
    assert run_cli(monkeypatch, 'fly') == 1


def test_bad_flag_value(monkeypatch, tmp_path):
    assert run_cli(monkeypatch, 'run', '--input', 'x.csv', '--jobs', 'many', '--out', str(tmp_path)) == 1
    assert run_cli(monkeypatch, 'run', '--input', 'x.csv', '--jobs', '0', '--out', str(tmp_path)) == 1


def test_missing_input_file_is_a_data_error(monkeypatch, tmp_path):
    assert run_cli(monkeypatch, 'run', '--input', str(tmp_path / 'missing.csv'), '--out', str(tmp_path / 'o')) == 2


def test_malformed_csv_is_a_data_error(monkeypatch, tmp_path):
    path = tmp_path / 'bad.csv'
    path.write_text('date,A,B\n2003-01-03,1.0,2.0\n2003-01-10,,2.0\n')
    assert run_cli(monkeypatch, 'run', '--input', str(path), '--out', str(tmp_path / 'o')) == 2


def test_simulate_then_run(monkeypatch, tmp_path):
    csv_path = tmp_path / 'panel.csv'
    monkeypatch.setattr(sys, 'argv', ['risknet', 'simulate', '--out', str(csv_path), '--assets', '3', '--periods', '60'])
    start()
    assert csv_path.is_file()
    assert (tmp_path / 'panel.csv.truth.json').is_file()

    code = run_cli(
        monkeypatch, 'run', '--input', str(csv_path), '--out', str(tmp_path / 'out'),
        '--bootstrap', '10', '--format', 'csv', '--innovations', 'normal',
    )
    assert code in (0, 3)
    assert (tmp_path / 'out' / 'manifest.json').is_file()
    assert (tmp_path / 'out' / 'cube.json').is_file()
    assert not (tmp_path / 'out' / 'trees.json').exists()

    code = run_cli(monkeypatch, 'indices', '--out', str(tmp_path / 'again'), '--bootstrap', '10', '--format', 'csv')
    assert code == 1


def test_configs_file_and_overrides(tmp_path, monkeypatch):
    monkeypatch.delenv('RISKNET_CACHE_DIR', raising=False)
    configs = tmp_path / 'configs.py'
    configs.write_text(
        "from pathlib import Path\n"
        "INPUT = Path(__file__).parent / 'prices.csv'\n"
        "OUT = 'results'\n"
        "SEED = 11\n"
        "BOOTSTRAP = 250\n"
        "INNOVATIONS = 'normal'\n"
        "TREES = ['2003-06-27']\n"
        "GTOL = 1e-5\n"
        "LOG_FITS = True\n"
    )
    (tmp_path / '.env').write_text('RISKNET_CACHE_DIR=/tmp/risknet-cache\n')
    application = RiskNet(configs, seed=3)
    run_config = application.run_config
    assert run_config.input == tmp_path / 'prices.csv'
    assert run_config.out == Path('results')
    assert run_config.seed == 3
    assert run_config.bootstrap == 250
    assert run_config.marginal.innovations == 'normal'
    assert run_config.marginal.optimizer.gtol == 1e-5
    assert run_config.copula.optimizer.gtol == 1e-5
    assert run_config.trees == ['2003-06-27']
    assert config['log_fits'] is True
    assert run_config.resolved_cache_dir == Path('/tmp/risknet-cache')


def test_environment_beats_env_file(tmp_path, monkeypatch):
    monkeypatch.setenv('RISKNET_CACHE_DIR', str(tmp_path / 'env-cache'))
    (tmp_path / '.env').write_text('RISKNET_CACHE_DIR=/elsewhere\n')
    configs = tmp_path / 'configs.py'
    configs.write_text("OUT = 'results'\n")
    assert RiskNet(configs).run_config.resolved_cache_dir == tmp_path / 'env-cache'


def test_env_file_reads_only_risknet_settings(tmp_path, monkeypatch, caplog):
    monkeypatch.delenv('RISKNET_CACHE_DIR', raising=False)
    env_file = tmp_path / '.env'
    env_file.write_text(
        '# cache\n'
        'SECRET_KEY="not ours"\n'
        'export RISKNET_CACHE_DIR="/data/risknet cache"\n'
        'RISKNET_UNUSED=1\n'
        'RISKNET_EMPTY=\n'
        'no assignment here\n'
    )
    with caplog.at_level(logging.WARNING, logger='risknet'):
        assert read_env_file(env_file) == {'cache_dir': '/data/risknet cache', 'unused': '1'}
    assert any('.env:6' in record.getMessage() for record in caplog.records)
    assert env_settings(env_file) == EnvSettings(cache_dir=Path('/data/risknet cache'))
    assert resolve_cache_dir(tmp_path / 'missing.env') is None


def test_invalid_configs():
    with pytest.raises(ConfigException):
        RiskNet('/nonexistent/configs.py')
    with pytest.raises(ConfigException):
        RiskNet(bootstrap=-1)
