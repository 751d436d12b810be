from pathlib import Path

from risknet import RiskNet
from risknet.simulation import SimulationSpec, simulate_panel, write_panel

BASE_DIR = Path(__file__).resolve().parent
panel_path = BASE_DIR / 'data' / 'synthetic_panel.csv'

if not panel_path.exists():
    panel, truth = simulate_panel(SimulationSpec(), seed=20240101)
    write_panel(panel, truth, panel_path)

manifest = RiskNet(BASE_DIR / 'configs.py').run()
print(manifest.summary())
