import sys

from rich import print as rprint

from risknet.cli.export_command import export
from risknet.cli.indices_command import indices
from risknet.cli.run_command import run
from risknet.cli.simulate_command import simulate
from risknet.cli.utils import clean_args, cli_error, help_message
from risknet.exceptions import RiskNetException
from risknet.status import EXIT_CONFIG_ERROR


def start() -> None:
    command = len(sys.argv) > 1 and sys.argv[1] or None
    args = clean_args(sys.argv[2:])
    if isinstance(level := args.get('log-level'), str):
        from risknet.logger import set_level
        set_level(level)

    try:
        match command:
            case '-h' | '--help':
                rprint(help_message)
            case 'run':
                run(args)
            case 'simulate':
                simulate(args)
            case 'indices':
                indices(args)
            case 'export':
                export(args)
            case _:
                cli_error('Invalid Arguments.')
    except RiskNetException as e:
        cli_error(e.detail, exit_code=e.exit_code)
    except (SystemExit, KeyboardInterrupt):
        raise
    except Exception as e:
        from risknet.logger import logger
        logger.critical(e)
        sys.exit(EXIT_CONFIG_ERROR)
