import sys

from rich import print as rprint

from risknet.cli.utils import cli_error, run_help_message, run_overrides


def export(args: dict) -> None:
    if 'h' in args or 'help' in args:
        rprint(run_help_message)
        return
    from risknet.main import RiskNet

    try:
        overrides = run_overrides(args)
    except ValueError as e:
        return cli_error(e)
    application = RiskNet(args.get('config'), **overrides)
    manifest = application.export(application.run_config.out)
    rprint(sorted(manifest.artifacts))
    sys.exit(manifest.exit_code)
