#!/usr/bin/env python3
"""
Local smoke run of the formation planner
This script drives every command against the shipped demo data
"""

import json
import os
import sys
import tempfile
from pathlib import Path

# Add the repository root to path for imports
sys.path.append(os.path.dirname(__file__))

from src.__main__ import main as planner_main  # noqa: E402

DATA_DIR = Path(__file__).parent / 'data'


def run_command(title, argv):
    print(f"\n=== {title} ===")
    print(f"Command: {' '.join(argv)}")
    try:
        code = planner_main(argv)
    except Exception as e:
        print(f"❌ {title} failed with exception: {e}")
        return False
    print(f"Exit code: {code}")
    if code == 0:
        print(f"✅ {title} successful!")
        return True
    print(f"❌ {title} failed")
    return False


def write_run_config(work_dir, wind_model):
    """Demo run config pointing at absolute data paths and a scratch output dir"""
    text = (DATA_DIR / 'demo_run.toml').read_text(encoding='utf-8')
    text = text.replace('scenario = "demo_scenario.toml"', f'scenario = "{DATA_DIR / "demo_scenario.toml"}"')
    text = text.replace('wind_grid = "demo_wind.csv"', f'wind_model = "{wind_model}"')
    text = text.replace('a330 = "a330_like.coeff"', f'a330 = "{DATA_DIR / "a330_like.coeff"}"')
    text = text.replace('output_dir = "../out/demo"', f'output_dir = "{work_dir / "out"}"')
    path = work_dir / 'run.toml'
    path.write_text(text, encoding='utf-8')
    return path


def main():
    """Main smoke function"""
    print("🚀 Starting formation planner smoke run")

    work_dir = Path(tempfile.mkdtemp(prefix='formation-smoke-'))
    print(f"Working directory: {work_dir}")

    grid = work_dir / 'jet.csv'
    model = work_dir / 'jet_model.txt'
    steps = [
        ('Generate wind grid', ['gen-wind', str(grid), '--resolution', '5', '--meander-amplitude', '3']),
        ('Fit wind model', ['fit-wind', str(grid), str(model)]),
    ]
    for title, argv in steps:
        if not run_command(title, argv):
            return False

    config = write_run_config(work_dir, model)
    if not run_command('Solve formation mission', ['solve', str(config), '--compare']):
        return False

    summary_path = work_dir / 'out' / 'summary.txt'
    print("\n" + "=" * 50)
    print(summary_path.read_text(encoding='utf-8'))

    comparison = json.loads((work_dir / 'out' / 'comparison.json').read_text(encoding='utf-8'))
    print(f"Formation DOC change versus solo: {comparison['comparison']['doc_pct']:.2f} %")

    return run_command('Departure delay sweep', ['sweep', 'delays', str(config), '--values', '0', '30'])


if __name__ == "__main__":
    success = main()
    if success:
        print("\n✅ All smoke steps passed!")
        sys.exit(0)
    else:
        print("\n❌ Some smoke steps failed!")
        sys.exit(1)
