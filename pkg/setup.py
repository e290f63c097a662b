#!/usr/bin/env python3
"""
Installer for the GPU cluster scheduling simulator

Installs requirements, checks that the simulator imports, writes a
config.json pointing at the shipped congested trace and validates it.
"""

import subprocess
import sys
from pathlib import Path

ROOT = Path(__file__).parent
MIN_PYTHON = (3, 8)
REQUIRED_MODULES = ("numpy", "jinja2", "sqlite3")


def python_ok():
    if sys.version_info[:2] >= MIN_PYTHON:
        return True
    print(f"ERROR: Python {'.'.join(map(str, MIN_PYTHON))}+ is required, found {sys.version.split()[0]}")
    return False


def pip_install():
    requirements = ROOT / "requirements.txt"
    if not requirements.is_file():
        print("ERROR: requirements.txt is missing")
        return False
    print(f"pip install -r {requirements.name}")
    result = subprocess.run([sys.executable, "-m", "pip", "install", "-r", str(requirements)])
    if result.returncode != 0:
        print(f"ERROR: pip exited with status {result.returncode}")
        return False
    return True


def imports_ok():
    missing = []
    for module in REQUIRED_MODULES:
        try:
            __import__(module)
        except ImportError as e:
            missing.append(f"{module} ({e})")
    for line in missing:
        print(f"✗ {line}")
    if not missing:
        print(f"✓ {', '.join(REQUIRED_MODULES)}")
    return not missing


def write_config():
    """config.json with the shipped trace; an existing file is validated, never replaced"""
    sys.path.insert(0, str(ROOT))
    from core.exceptions import ConfigError
    from utils.config import Config

    config_path = ROOT / "config.json"
    if config_path.exists():
        config = Config(str(config_path))
        print("Keeping existing config.json")
    else:
        config = Config()
        config.set_nested("workload.trace", str(ROOT / "data" / "traces" / "congested_40.csv"))
        config.save(str(config_path))
        print("Wrote config.json")

    try:
        config.validate(require_trace=True)
    except ConfigError as e:
        print(e)
        return False
    return True


def main():
    print("GPU Cluster Scheduling Simulator - Setup")
    print("=" * 45)

    steps = (
        ("Python version", python_ok),
        ("Dependencies", pip_install),
        ("Imports", imports_ok),
        ("Configuration", write_config),
    )
    for title, step in steps:
        print(f"\n[{title}]")
        if not step():
            print(f"\nSetup stopped at: {title}")
            return 1

    print("\nReady. Try:")
    print("  python main.py simulate --config config.json --policy all")
    return 0


def build_package():
    """Packaging metadata, used when pip/setuptools invoke this file with a command"""
    from setuptools import setup

    setup(
        name="gpu-cluster-sim",
        version="0.1.0",
        packages=["core", "database", "reporting", "scheduler", "ui", "utils", "workload"],
        py_modules=["main"],
        install_requires=["jinja2>=3.1.0", "numpy>=1.22.0"],
        python_requires=">=3.8",
    )


if __name__ == "__main__":
    if len(sys.argv) > 1:
        build_package()
    else:
        sys.exit(main())
