"""
Settings for aigsynth.

Built-in defaults form a nested dictionary. A YAML or JSON file named on the
command line is merged over them, section by section, and flags override the
result. Keys are addressed by dotted paths such as "synthesis.method".
"""

import copy
import json
import logging
import os
from typing import Any, Dict, Optional

import yaml


def merge_into(base: Dict[str, Any], overlay: Dict[str, Any]) -> None:
    """Overlay nested mappings onto `base` in place; non-mapping values replace."""
    for name, item in overlay.items():
        existing = base.get(name)
        if isinstance(item, dict) and isinstance(existing, dict):
            merge_into(existing, item)
        else:
            base[name] = item


class Config:
    """
    Synthesizer settings.

    Nothing touches the disk except `load` (from the constructor) and an
    explicit `save`.
    """

    DEFAULT_CONFIG = {
        "app": {
            "name": "aigsynth",
            "log_level": "INFO",
        },
        "sat": {
            "solver": "g4",
        },
        "synthesis": {
            "method": "sl",
            "negw": "aux",
            "minimize_cores": True,
            "post_minimize": True,
        },
        "checks": {
            "self_check": False,
        },
        "verify": {
            "simulation_runs": 10000,
            "simulation_steps": 100,
            "simulation_seed": 0,
        },
        "stats": {
            "path": None,
        },
    }

    def __init__(self, config_file: Optional[str] = None):
        """
        Start from the defaults and merge `config_file` over them if given.

        Raises:
            FileNotFoundError: If `config_file` does not exist
            ValueError: If it cannot be parsed
        """
        self.logger = logging.getLogger(__name__)
        self.config_file = config_file
        self.config: Dict[str, Any] = copy.deepcopy(self.DEFAULT_CONFIG)
        if config_file is None:
            self.logger.debug("Using built-in settings")
        else:
            self.load()

    @staticmethod
    def _is_json(path: str) -> bool:
        return path.lower().endswith(".json")

    def load(self) -> None:
        """
        Merge the settings file over the current values.

        Raises:
            FileNotFoundError: If the file is missing
            ValueError: If it is not valid YAML/JSON or its top level is not a mapping
        """
        self.logger.info("Reading settings from %s", self.config_file)
        with open(self.config_file) as stream:
            if self._is_json(self.config_file):
                data = json.load(stream)
            else:
                try:
                    data = yaml.safe_load(stream)
                except yaml.YAMLError as e:
                    raise ValueError(f"{self.config_file}: {e}") from e
        if data is None:
            return
        if not isinstance(data, dict):
            raise ValueError(f"{self.config_file}: top level must be a mapping")
        merge_into(self.config, data)

    def save(self, path: Optional[str] = None) -> None:
        """
        Write the current settings, as JSON if `path` ends in .json and YAML otherwise.

        Raises:
            ValueError: If neither `path` nor a loaded file names a destination
        """
        target = path or self.config_file
        if target is None:
            raise ValueError("no configuration file to save to")
        parent = os.path.dirname(target)
        if parent:
            os.makedirs(parent, exist_ok=True)
        with open(target, "w") as stream:
            if self._is_json(target):
                json.dump(self.config, stream, indent=2)
            else:
                yaml.safe_dump(self.config, stream, default_flow_style=False, sort_keys=False)
        self.logger.info("Settings written to %s", target)

    def get(self, key_path: str, default: Any = None) -> Any:
        """Value at a dotted path, or `default` when any segment is missing."""
        node: Any = self.config
        for part in key_path.split("."):
            if not isinstance(node, dict) or part not in node:
                return default
            node = node[part]
        return node

    def set(self, key_path: str, value: Any) -> None:
        """Store `value` at a dotted path, creating missing sections on the way."""
        *sections, leaf = key_path.split(".")
        node = self.config
        for part in sections:
            node = node.setdefault(part, {})
        node[leaf] = value

    def get_section(self, section: str) -> Dict[str, Any]:
        return self.config.get(section, {})

    def reset_to_defaults(self) -> None:
        self.config = copy.deepcopy(self.DEFAULT_CONFIG)
        self.logger.info("Settings reset to built-in defaults")
