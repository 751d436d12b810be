import sys

from rich import print as rprint

from risknet.cli.utils import cli_error, run_help_message, run_overrides


def run(args: dict) -> None:
    if 'h' in args or 'help' in args:
        rprint(run_help_message)
        return
    from risknet.main import RiskNet

    try:
        overrides = run_overrides(args)
    except ValueError as e:
        return cli_error(e)
    manifest = RiskNet(args.get('config'), **overrides).run()
    rprint(manifest.summary())
    sys.exit(manifest.exit_code)
