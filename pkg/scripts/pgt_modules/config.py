import os
import sys
import yaml
from pathlib import Path
from typing import Dict, Any, Optional

from dotenv import load_dotenv


CONFIG_DIR = "PGT"
CONFIG_FILE = "config.yaml"

DEFAULT_SEED = 20240601
DEFAULT_REPS = 100_000
DEFAULT_TOLERANCE = 1e-9
DEFAULT_P_GRID = "0.29:0.39:0.005"
DEFAULT_VERIFY_TRIALS = 1000


class PGTConfig:
    def __init__(self, project_dir: Optional[Path] = None):
        self._config_path: Optional[Path] = None
        self._data: Dict[str, Any] = {}
        self._project_dir_override = project_dir
        self._load()

    def _load(self):
        # Use provided project directory or start from CWD
        if self._project_dir_override:
            start_dir = self._project_dir_override
        else:
            start_dir = Path.cwd()

        # .env never overrides variables that are already exported
        env_file = start_dir / ".env"
        if env_file.is_file():
            load_dotenv(env_file, override=False)

        # Walk up from the start directory to find PGT/config.yaml
        current = start_dir
        while True:
            candidate = current / CONFIG_DIR / CONFIG_FILE
            if candidate.exists() and candidate.is_file():
                self._config_path = candidate.resolve()
                self._load_config_from_file(candidate)
                return
            if current.parent == current:
                break
            current = current.parent

        # If no config found, every property falls back to its default
        self._config_path = None
        self._data = {}

    def _load_config_from_file(self, path: Path):
        """Load configuration from a specific file path."""
        try:
            with open(path, "r", encoding="utf-8") as f:
                self._data = yaml.safe_load(f) or {}
        except Exception as e:
            print(
                f"Warning: Failed to load config from {path}: {e}",
                file=sys.stderr,
            )
            self._data = {}
        if not isinstance(self._data, dict):
            print(
                f"Warning: Ignoring config {path}: top level is not a mapping",
                file=sys.stderr,
            )
            self._data = {}

    def reinitialize_for_project(self, project_dir: Path):
        """Reload the configuration as seen from another project directory."""
        self._project_dir_override = project_dir
        self._load()

    def _env(self, name: str) -> Optional[str]:
        value = os.getenv(name)
        if value is None or not value.strip():
            return None
        return value.strip()

    @property
    def config_path(self) -> Optional[Path]:
        return self._config_path

    @property
    def project_root(self) -> Path:
        if self._config_path:
            # PGT/config.yaml lives one level below the project root
            return self._config_path.parent.parent
        return Path.cwd()

    @property
    def seed(self) -> int:
        """Master seed for Monte Carlo runs and random verification sweeps."""
        env = self._env("PGT_SEED")
        if env is not None:
            return int(env)
        return int(self._data.get("seed", DEFAULT_SEED))

    @property
    def reps(self) -> int:
        env = self._env("PGT_REPS")
        if env is not None:
            return int(env)
        return int(self._data.get("reps", DEFAULT_REPS))

    @property
    def tolerance(self) -> float:
        """Strict-minimizer margin used by optimality verdicts."""
        env = self._env("PGT_TOL")
        if env is not None:
            return float(env)
        return float(self._data.get("tolerance", DEFAULT_TOLERANCE))

    @property
    def workers(self) -> int:
        """Worker processes for simulation and sweeps (default: machine parallelism)."""
        env = self._env("PGT_WORKERS")
        if env is not None:
            return max(1, int(env))
        value = self._data.get("workers")
        if value is None:
            return os.cpu_count() or 1
        return max(1, int(value))

    @property
    def output_format(self) -> str:
        return self._data.get("output_format", "json")

    @property
    def log_level(self) -> str:
        env = self._env("PGT_LOG_LEVEL")
        if env is not None:
            return env.upper()
        return str(self._data.get("logging", {}).get("level", "INFO")).upper()

    @property
    def log_to_file(self) -> bool:
        """Whether runs also write execution.log under logs_dir."""
        env = self._env("PGT_LOG_FILE")
        if env is not None:
            return env.lower() in ("1", "true", "yes", "on")
        return bool(self._data.get("logging", {}).get("file", False))

    @property
    def logs_dir(self) -> Path:
        custom = self._data.get("logging", {}).get("dir")
        if custom:
            return self.project_root / custom
        return self.project_root / CONFIG_DIR / "logs"

    @property
    def sweep_p_grid(self) -> str:
        return str(self._data.get("sweep", {}).get("p_grid", DEFAULT_P_GRID))

    @property
    def verify_trials(self) -> int:
        return int(self._data.get("verify", {}).get("trials", DEFAULT_VERIFY_TRIALS))


# Singleton instance
config: PGTConfig = PGTConfig()
