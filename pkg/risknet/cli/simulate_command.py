from rich import print as rprint

from risknet.cli.utils import cli_error, simulate_help_message


def simulate(args: dict) -> None:
    if 'h' in args or 'help' in args:
        rprint(simulate_help_message)
        return
    from risknet.simulation import SMOKE_SPEC, build_simulation_spec, simulate_panel, write_panel

    if not isinstance(args.get('out'), str):
        return cli_error('--out is required')
    settings = dict(SMOKE_SPEC) if 'smoke' in args else {}
    try:
        for key in ('assets', 'periods'):
            if key in args:
                settings[key] = int(args[key])
        seed = int(args.get('seed', 0))
    except (TypeError, ValueError) as e:
        return cli_error(e)
    if 'no-stress' in args:
        settings['stress_window'] = None

    spec = build_simulation_spec(**settings)
    panel, truth = simulate_panel(spec, seed=seed)
    csv_path, truth_path = write_panel(panel, truth, args['out'])
    rprint(f'Wrote {csv_path} ({panel.shape[0]} rows x {panel.shape[1]} assets) and {truth_path}')
