import sys

from risknet import status

logo = r"""│        _     _                 _                         │
│   _ __(_)___| | ___ __   ___  | |_                       │
│  | '__| / __| |/ / '_ \ / _ \ | __|                      │
│  | |  | \__ \   <| | | |  __/ | |_                       │
│  |_|  |_|___/_|\_\_| |_|\___|  \__|                      │
"""

help_message = f"""╭{58 * '─'}╮
{logo}│{58 * ' '}│
│   usage:                                                 │
│       - risknet run --input <csv> [--out <dir>] [...]    │
│           Estimate the correlation cube, build the trees │
│           and compute the topology series                │
│                                                          │
│       - risknet simulate --out <csv> [--seed <u64>]      │
│           Write a synthetic price panel and its truth    │
│                                                          │
│       - risknet indices --cube <json> [--out <dir>]      │
│           Re-run the trees and indices from a cube       │
│                                                          │
│       - risknet export --out <dir> [--trees <periods>]   │
│           Re-render trees and charts of an earlier run   │
│                                                          │
│       - risknet [--help | -h ]                           │
│           Show this message and exit                     │
╰{58 * '─'}╯
"""

run_help_message = """
    --input PATH                    Price CSV: header row, period column, one column per asset.
    --out PATH                      Output directory.  [default: risknet-out]
    --config PATH                   Python configs file (INPUT, OUT, SEED, JOBS, ...).
    --seed INTEGER                  Global seed of the bootstrap streams.  [default: 0]
    --jobs INTEGER                  Worker processes.  [default: 1]
    --bootstrap INTEGER             Power-law bootstrap replicates per period.  [default: 1000]
    --innovations [normal|skewt]    Marginal innovation law.  [default: skewt]
    --trees TEXT                    Comma separated periods to export as DOT.
    --format [csv|json|dot|svg]     Artifact formats, repeatable.  [default: all]
    --labels PATH                   CSV with columns asset,label for DOT node names.
    --log-fits                      Log every fitted model to logs/estimation.log.
    --log-level TEXT                Console and file log level.  [default: INFO]
    --help                          Show this message and exit.
    """

simulate_help_message = """
    --out PATH                      Price CSV to write; the truth goes to <csv>.truth.json.
    --seed INTEGER                  Seed of the generator.  [default: 0]
    --assets INTEGER                Number of assets.  [default: 28]
    --periods INTEGER               Number of return periods.  [default: 747]
    --smoke                         The small panel used in CI (8 assets, 200 periods).
    --no-stress                     Do not inject the high-correlation window.
    --help                          Show this message and exit.
    """

REPEATABLE = {'format'}


def cli_error(message: str | Exception, exit_code: int = status.EXIT_CONFIG_ERROR) -> None:
    from risknet.logger import logger

    logger.error(f'Error: {message}\n\nUse risknet -h for more help')
    sys.exit(exit_code)


def clean_args(args: list[str]) -> dict:
    """
    Input: ['--input', 'prices.csv', '--format', 'csv', '--format', 'svg', '--log-fits']
    Output: {'input': 'prices.csv', 'format': ['csv', 'svg'], 'log-fits': True}
    """
    _args = dict()
    for i, arg in enumerate(args):
        if not arg.startswith('--'):
            continue
        key = arg[2:]
        if (i + 1) < len(args) and not args[i + 1].startswith('--'):
            value = args[i + 1]
        else:
            value = True
        if key in REPEATABLE:
            values = [value] if value is True else value.split(',')
            _args.setdefault(key, []).extend(values)
        else:
            _args[key] = value
    return _args


def split_list(value: str | bool | None) -> list[str] | None:
    if value is None:
        return None
    if value is True:
        raise ValueError('expected a comma separated list')
    return [item.strip() for item in value.split(',') if item.strip()]


def _integer(args: dict, key: str) -> int | None:
    if key not in args:
        return None
    try:
        return int(args[key])
    except (TypeError, ValueError):
        raise ValueError(f'--{key} expects an integer, got {args[key]!r}')


def run_overrides(args: dict) -> dict:
    """CLI flags -> RiskNet overrides; flags that are not given stay unset so the configs file applies."""
    overrides = {
        'input': args.get('input'),
        'out': args.get('out'),
        'seed': _integer(args, 'seed'),
        'jobs': _integer(args, 'jobs'),
        'bootstrap': _integer(args, 'bootstrap'),
        'innovations': args.get('innovations'),
        'trees': split_list(args.get('trees')),
        'formats': args.get('format'),
        'labels': args.get('labels'),
    }
    if 'log-fits' in args:
        overrides['log_fits'] = True
    for key in ('input', 'out', 'labels', 'innovations'):
        if overrides[key] is True:
            raise ValueError(f'--{key} expects a value')
    return {key: value for key, value in overrides.items() if value is not None}
