#!/usr/bin/env python3
"""
Configuration management for the cluster scheduling simulator
"""

import copy
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional

from core.exceptions import ConfigError
from core.latency import DEFAULT_PROFILES_PATH, LATENCY_VARIANTS

logger = logging.getLogger(__name__)

POLICY_CHOICES = ("gandiva", "tiresias", "dally", "dally_manual", "dally_nowait", "dally_fullyconsolidated")
DALLY_MODES = ("auto", "manual", "nowait", "fullyconsolidated")
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")

DEFAULTS: Dict[str, Any] = {
    "topology": {
        "gpus_per_machine": 8,
        "machines_per_rack": 8,
        "num_racks": 2,
        "machine": {"bandwidth_gbps": 900.0, "latency_us": 1.0},
        "rack": {"bandwidth_gbps": 400.0, "latency_us": 5.0},
        "network": {"bandwidth_gbps": 800.0, "latency_us": 10.0},
    },
    "workload": {
        "trace": None,
        "arrival": "batch",
        "rate": None,
        "seed": 0,
    },
    "policy": {
        "name": "dally",
    },
    "dally": {
        "mode": "auto",
        "t_mc_s": 43200.0,
        "t_rk_s": 86400.0,
        "history_limit_s": 604800.0,
        "preemption_margin": 0.5,
        "max_preemptions_per_round": 4,
    },
    "tiresias": {
        "thresholds_gpu_s": [3600.0, 36000.0],
        "max_preemptions_per_round": 4,
    },
    "gandiva": {
        "migration_period_s": 1800.0,
    },
    "latency": {
        "variant": "profile_table",
        "profiles": str(DEFAULT_PROFILES_PATH),
        "static_penalty": {"machine": 0.0, "rack": 0.1, "network": 0.5},
    },
    "engine": {
        "round_period_s": 360.0,
        "checkpoint_restore_overhead_s": 0.0,
        "horizon_s": 1e9,
        "reschedule_on_completion": True,
        "audit": False,
    },
    "metrics": {
        "machine_hour_usd": 32.77,
    },
    "output": {
        "dir": "results",
    },
    "log_level": "INFO",
}


def _deep_merge(base: Dict[str, Any], overlay: Dict[str, Any]) -> Dict[str, Any]:
    merged = copy.deepcopy(base)
    for key, value in overlay.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def _unknown_keys(data: Dict[str, Any], schema: Dict[str, Any], prefix: str = "") -> List[str]:
    unknown = []
    for key, value in data.items():
        dotted = f"{prefix}{key}"
        if key not in schema:
            unknown.append(dotted)
        elif isinstance(schema[key], dict):
            if not isinstance(value, dict):
                unknown.append(f"{dotted} (expected a section)")
            else:
                unknown.extend(_unknown_keys(value, schema[key], f"{dotted}."))
    return unknown


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


class Config:
    """Sectioned configuration with JSON file support and dotted key access"""

    def __init__(self, config_path: Optional[str] = None):
        self.config_path = Path(config_path) if config_path else None
        self.config_data: Dict[str, Any] = {}
        self.defaults = copy.deepcopy(DEFAULTS)

        if self.config_path is not None:
            self._load_config()

    def _load_config(self):
        """Load configuration from file; a missing or unreadable file is an error"""
        if not self.config_path.exists():
            raise FileNotFoundError(f"Configuration file not found: {self.config_path}")
        try:
            with open(self.config_path, 'r', encoding='utf-8') as f:
                data = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigError(f"{self.config_path}: invalid JSON ({e})")
        if not isinstance(data, dict):
            raise ConfigError(f"{self.config_path}: top level must be an object")
        self.update(data)
        logger.info("Configuration loaded from %s", self.config_path)

    def get(self, key: str, default: Any = None) -> Any:
        """Get a value by dotted key, e.g. 'dally.t_mc_s', falling back to defaults"""
        node: Any = self.get_all()
        for part in key.split("."):
            if not isinstance(node, dict) or part not in node:
                return default
            node = node[part]
        return node

    def set(self, key: str, value: Any) -> None:
        """Set configuration value"""
        self.set_nested(key, value)

    def set_nested(self, key: str, value: Any) -> None:
        parts = key.split(".")
        schema: Any = self.defaults
        for part in parts:
            if not isinstance(schema, dict) or part not in schema:
                raise ConfigError(f"Unknown configuration key: {key}")
            schema = schema[part]
        node = self.config_data
        for part in parts[:-1]:
            node = node.setdefault(part, {})
        node[parts[-1]] = value

    def update(self, updates: Dict[str, Any]) -> None:
        """Merge a nested dict of values; unknown keys are rejected"""
        unknown = _unknown_keys(updates, self.defaults)
        if unknown:
            raise ConfigError.from_issues(f"Unknown configuration key: {key}" for key in unknown)
        self.config_data = _deep_merge(self.config_data, updates)

    def get_all(self) -> Dict[str, Any]:
        """Get all configuration values (merged with defaults)"""
        return _deep_merge(self.defaults, self.config_data)

    def save(self, path: Optional[str] = None) -> bool:
        """Save the merged configuration to file"""
        target = Path(path) if path else self.config_path
        if target is None:
            logger.error("No configuration path to save to")
            return False
        try:
            target.parent.mkdir(parents=True, exist_ok=True)
            with open(target, 'w', encoding='utf-8') as f:
                json.dump(self.get_all(), f, indent=2, sort_keys=True)
                f.write("\n")
            return True
        except IOError as e:
            logger.error("Error saving configuration to %s: %s", target, e)
            return False

    def validate(self, require_trace: bool = True) -> bool:
        """Check every value; raises ConfigError listing all problems"""
        issues: List[str] = []

        def positive_int(key):
            value = self.get(key)
            if not isinstance(value, int) or isinstance(value, bool) or value < 1:
                issues.append(f"{key} must be a positive integer: {value!r}")

        def number(key, minimum=0.0, strict=False):
            value = self.get(key)
            if not _is_number(value) or value < minimum or (strict and value == minimum):
                bound = ">" if strict else ">="
                issues.append(f"{key} must be a number {bound} {minimum:g}: {value!r}")

        def choice(key, options):
            value = self.get(key)
            if value not in options:
                issues.append(f"{key} must be one of {', '.join(options)}: {value!r}")

        for key in ("gpus_per_machine", "machines_per_rack", "num_racks"):
            positive_int(f"topology.{key}")
        for tier in ("machine", "rack", "network"):
            number(f"topology.{tier}.bandwidth_gbps", strict=True)
            number(f"topology.{tier}.latency_us")

        choice("workload.arrival", ("batch", "poisson"))
        if self.get("workload.arrival") == "poisson":
            number("workload.rate", strict=True)
        if not isinstance(self.get("workload.seed"), int):
            issues.append(f"workload.seed must be an integer: {self.get('workload.seed')!r}")
        trace = self.get("workload.trace")
        if require_trace:
            if not trace:
                issues.append("workload.trace is required")
            elif not Path(trace).is_file():
                issues.append(f"workload.trace not found: {trace}")

        if self.get("policy.name") not in POLICY_CHOICES + ("all",):
            issues.append(f"policy.name must be one of {', '.join(POLICY_CHOICES)} or all: "
                          f"{self.get('policy.name')!r}")

        choice("dally.mode", DALLY_MODES)
        for key in ("t_mc_s", "t_rk_s", "preemption_margin"):
            number(f"dally.{key}")
        number("dally.history_limit_s", strict=True)
        for section in ("dally", "tiresias"):
            value = self.get(f"{section}.max_preemptions_per_round")
            if not isinstance(value, int) or isinstance(value, bool) or value < 0:
                issues.append(f"{section}.max_preemptions_per_round must be an integer >= 0: {value!r}")

        thresholds = self.get("tiresias.thresholds_gpu_s")
        if not isinstance(thresholds, list) or not all(_is_number(t) for t in thresholds):
            issues.append(f"tiresias.thresholds_gpu_s must be a list of numbers: {thresholds!r}")
        elif any(b <= a for a, b in zip(thresholds, thresholds[1:])):
            issues.append(f"tiresias.thresholds_gpu_s must be strictly ascending: {thresholds!r}")

        number("gandiva.migration_period_s", strict=True)

        choice("latency.variant", LATENCY_VARIANTS)
        profiles = self.get("latency.profiles")
        if not profiles or not Path(profiles).is_file():
            issues.append(f"latency.profiles not found: {profiles}")
        for tier in ("machine", "rack", "network"):
            number(f"latency.static_penalty.{tier}")

        number("engine.round_period_s", strict=True)
        number("engine.checkpoint_restore_overhead_s")
        number("engine.horizon_s", strict=True)
        for key in ("reschedule_on_completion", "audit"):
            if not isinstance(self.get(f"engine.{key}"), bool):
                issues.append(f"engine.{key} must be true or false")

        number("metrics.machine_hour_usd")
        if not self.get("output.dir"):
            issues.append("output.dir must not be empty")
        choice("log_level", LOG_LEVELS)

        if issues:
            raise ConfigError.from_issues(issues)
        return True

    def print_config(self):
        """Print current configuration"""
        print("Current Configuration:")
        print("-" * 40)
        self._print_section(self.get_all(), "")
        print("-" * 40)

    def _print_section(self, data: Dict[str, Any], prefix: str):
        for key, value in sorted(data.items()):
            if isinstance(value, dict):
                self._print_section(value, f"{prefix}{key}.")
            else:
                print(f"{prefix + key:40} = {value}")


def create_default_config(config_path: str = "config.json") -> Config:
    """Write a configuration file holding every default"""
    config = Config()
    config.save(config_path)
    config.config_path = Path(config_path)
    return config


def load_config(config_path: Optional[str] = None) -> Config:
    """Load configuration from file, or defaults when no path is given"""
    return Config(config_path)


def parse_override(value: str) -> Any:
    """Values on the command line are JSON when they parse as JSON, else strings"""
    try:
        return json.loads(value)
    except json.JSONDecodeError:
        return value


if __name__ == "__main__":
    import argparse

    parser = argparse.ArgumentParser(description='Configuration Management')
    parser.add_argument('--config', default=None, help='Configuration file path')
    parser.add_argument('--validate', action='store_true', help='Validate configuration')
    parser.add_argument('--create-default', metavar='PATH', help='Write default configuration to PATH')
    parser.add_argument('--print', action='store_true', help='Print current configuration')
    parser.add_argument('--get', metavar='KEY', help='Get configuration value (dotted key)')

    args = parser.parse_args()

    if args.create_default:
        create_default_config(args.create_default)
        print(f"Default configuration written to {args.create_default}")

    config = Config(args.config)

    if args.validate:
        try:
            config.validate(require_trace=False)
            print("Configuration validation passed")
        except ConfigError as e:
            print(e)

    if args.print:
        config.print_config()

    if args.get:
        print(f"{args.get} = {config.get(args.get)}")
