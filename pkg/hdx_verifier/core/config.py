"""Configuration handler for hdx-verifier."""

import copy
import os
from typing import Any, Dict, Optional

import yaml
from dotenv import load_dotenv
from pydantic import BaseModel, Field

CONFIG_FILENAME = ".hdxrc"


class Tolerances(BaseModel):
    """Numeric tolerances shared by every verification routine."""

    identity: float = Field(1e-10, gt=0)
    inequality: float = Field(1e-9, gt=0)
    stochastic: float = Field(1e-12, gt=0)
    self_adjoint: float = Field(1e-8, gt=0)
    geometry: float = Field(1e-9, gt=0)
    accumulated: float = Field(1e-9, gt=0)

    def with_override(self, tolerance: Optional[float]) -> "Tolerances":
        """Replace the identity/inequality pair by a single global value."""
        if tolerance is None:
            return self
        return self.model_copy(update={"identity": tolerance, "inequality": tolerance})


def get_default_config() -> Dict[str, Any]:
    """Get default configuration."""
    return {
        "tolerances": Tolerances().model_dump(),
        "verification": {
            "trials": 100,
            "seed": 0,
        },
        "generation": {
            "max_retries": 100,
        },
        "overlap": {
            "samples": 10000,
            "nudge": 1e-7,
        },
        "parallel": {
            "max_workers": None,
        },
    }


def _merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    merged = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def load_config(config_path: Optional[str] = None) -> Dict[str, Any]:
    """Load configuration from a .hdxrc file merged over the defaults."""
    load_dotenv()
    if not config_path:
        config_path = os.environ.get("HDX_CONFIG") or os.path.join(os.getcwd(), CONFIG_FILENAME)

    config = get_default_config()
    if os.path.exists(config_path):
        with open(config_path, "r") as f:
            loaded = yaml.safe_load(f) or {}
        config = _merge(config, loaded)

    env_tolerance = os.environ.get("HDX_TOLERANCE")
    if env_tolerance:
        config["tolerances"]["identity"] = float(env_tolerance)
        config["tolerances"]["inequality"] = float(env_tolerance)
    return config


def tolerances_from_config(config: Dict[str, Any]) -> Tolerances:
    """Build the validated tolerance model from a loaded configuration."""
    return Tolerances(**config.get("tolerances", {}))
