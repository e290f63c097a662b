#!/usr/bin/env python3
"""
GPU cluster scheduling simulator

    python main.py simulate --config data/config.example.json --policy all --racks 2,4
    python main.py gen-trace --n-jobs 500 --out data/traces/synthetic_500.csv
    python main.py compare --results results
"""

import sys
from pathlib import Path

# Add the project root to Python path
sys.path.insert(0, str(Path(__file__).parent))

REQUIRED = ("numpy", "jinja2")


def missing_dependencies():
    missing = []
    for module in REQUIRED:
        try:
            __import__(module)
        except ImportError:
            missing.append(module)
    return missing


def main() -> int:
    missing = missing_dependencies()
    if missing:
        print(f"ERROR: missing dependencies: {', '.join(missing)}")
        print("Run: python setup.py   (or: pip install -r requirements.txt)")
        return 1
    from ui.cli_interface import main as cli_main
    return cli_main()


if __name__ == "__main__":
    sys.exit(main())
