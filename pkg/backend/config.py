"""Application configuration management."""

import json
import os
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic_settings import BaseSettings

from exceptions import ValidationError


class Settings(BaseSettings):
    """Application settings with environment variable support."""

    model_config = {
        'env_prefix': 'CFL_',
        'env_file': '.env',
        'case_sensitive': False
    }

    # Logging
    log_level: str = "INFO"
    log_format: str = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
    log_json: bool = False
    log_file: Optional[str] = None

    # Sweep defaults
    quantizers: List[int] = [20, 32, 43, 55]
    lambda_const: float = 0.057
    rate_model: str = "param-only"
    block_size: int = 8
    chroma_format: str = "420"

    # Quantizer mapping
    step_scale: float = 1.0
    deadzone: float = 1.0 / 3.0

    # Execution
    jobs: int = os.cpu_count() or 1
    seed: int = 0
    out_dir: str = "out"


def load_config_file(path: str) -> Dict[str, Any]:
    """Load a declarative run configuration from TOML or JSON."""
    config_path = Path(path)
    if not config_path.exists():
        raise ValidationError(f"config file not found: {path}", details={"path": path})

    raw = config_path.read_bytes()
    try:
        if config_path.suffix.lower() == ".json":
            data = json.loads(raw.decode("utf-8"))
        else:
            data = tomllib.loads(raw.decode("utf-8"))
    except (ValueError, tomllib.TOMLDecodeError) as e:
        raise ValidationError(f"config file unreadable: {e}", details={"path": path})

    if not isinstance(data, dict):
        raise ValidationError("config file must hold a table", details={"path": path})
    # Accept both "lambda-const" and "lambda_const" spellings.
    return {key.replace("-", "_"): value for key, value in data.items()}


# Global settings instance
settings = Settings()
