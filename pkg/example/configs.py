"""Run settings read by `risknet run --config example/configs.py`; CLI flags override them."""
from pathlib import Path

from risknet.utils import load_env

BASE_DIR = Path(__file__).resolve().parent
env = load_env(BASE_DIR / '.env')

INPUT = BASE_DIR / 'data' / 'synthetic_panel.csv'

OUT = BASE_DIR / 'out'

SEED = 20240101

JOBS = int(env.get('JOBS', 4))

BOOTSTRAP = 1000

INNOVATIONS = 'skewt'

# Periods whose spanning trees are written as DOT files (the second one falls in the stress window)
TREES = ['2003-06-27', '2011-06-24', '2013-07-19', '2017-04-21']

FORMATS = ['csv', 'json', 'dot', 'svg']

LABELS = BASE_DIR / 'labels.csv'

LOG_FITS = True

GTOL = 1e-6

MAXITER = 500
