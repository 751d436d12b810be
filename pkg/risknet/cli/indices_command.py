import sys

from rich import print as rprint

from risknet.cli.utils import cli_error, run_help_message, run_overrides


def indices(args: dict) -> None:
    if 'h' in args or 'help' in args:
        rprint('    --cube PATH                     cube.json written by `risknet run`.' + run_help_message)
        return
    from risknet.main import RiskNet

    if not isinstance(args.get('cube'), str):
        return cli_error('--cube is required')
    try:
        overrides = run_overrides(args)
    except ValueError as e:
        return cli_error(e)
    manifest = RiskNet(args.get('config'), **overrides).indices(args['cube'])
    rprint({'trees': manifest.dimensions.get('trees'), 'artifacts': len(manifest.artifacts)})
    sys.exit(manifest.exit_code)
