from pathlib import Path

import numpy as np
import pytest

from risknet._utils import dumps, loads
from risknet.configs import config
from risknet.simulation import SMOKE_SPEC, build_simulation_spec, simulate_panel, write_panel

GOLDEN_DIR = Path(__file__).parent / 'golden'


@pytest.fixture(autouse=True)
def _restore_config():
    saved = dict(config)
    yield
    config.clear()
    config.update(saved)


@pytest.fixture()
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope='session')
def smoke_csv(tmp_path_factory) -> Path:
    panel, truth = simulate_panel(build_simulation_spec(**SMOKE_SPEC), seed=7)
    path, _ = write_panel(panel, truth, tmp_path_factory.mktemp('smoke') / 'smoke.csv')
    return path


@pytest.fixture(scope='session')
def micro_csv(tmp_path_factory) -> Path:
    """Two assets, short series: one pair and a single-edge tree per period."""
    panel, truth = simulate_panel(build_simulation_spec(assets=2, periods=150, sectors=1, burn=100), seed=3)
    path, _ = write_panel(panel, truth, tmp_path_factory.mktemp('micro') / 'micro.csv')
    return path


def pytest_addoption(parser):
    parser.addoption(
        '--update-golden', action='store_true', default=False,
        help='Rewrite tests/golden/*.json from the current outputs instead of comparing.',
    )


@pytest.fixture()
def golden(request):
    """
    Compare a JSON-able document with tests/golden/<name>.json.
    A missing file is a failure; files are only written with --update-golden.
    """
    update = request.config.getoption('--update-golden')

    def check(name: str, document, rel: float = 1e-9):
        path = GOLDEN_DIR / f'{name}.json'
        document = loads(dumps(document))
        if update:
            GOLDEN_DIR.mkdir(exist_ok=True)
            path.write_bytes(dumps(document))
            return
        if not path.is_file():
            pytest.fail(f'{path} is missing (run pytest --update-golden to create it)')
        expected = loads(path.read_bytes())
        assert _approx_equal(document, expected, rel), f'{name} differs from {path}'
    return check


def _approx_equal(actual, expected, rel: float) -> bool:
    if isinstance(expected, dict):
        return isinstance(actual, dict) and actual.keys() == expected.keys() and all(
            _approx_equal(actual[k], expected[k], rel) for k in expected
        )
    if isinstance(expected, list):
        return isinstance(actual, list) and len(actual) == len(expected) and all(
            _approx_equal(a, e, rel) for a, e in zip(actual, expected)
        )
    if isinstance(expected, float) or isinstance(actual, float):
        if expected is None or actual is None:
            return actual is expected
        return actual == pytest.approx(expected, rel=rel, abs=1e-12, nan_ok=True)
    return actual == expected
