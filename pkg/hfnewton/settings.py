from pathlib import Path
import json

from dotenv import load_dotenv
from pydantic_settings import BaseSettings, SettingsConfigDict

# Config file path
ROOT_DIR = Path(__file__).resolve().parents[1]
CONFIG_FILE = ROOT_DIR / "config" / "config.json"
ENV_FILE = ROOT_DIR / "config" / ".env"


def load_env_files(override: bool = False) -> None:
    """Load environment variables from known .env locations."""
    env_candidates = [
        ENV_FILE,  # preferred shared location
        ROOT_DIR / ".env",
    ]
    for env_path in env_candidates:
        if env_path.exists():
            load_dotenv(env_path, override=override)


# Load .env values early so HFNEWTON_* variables reach the settings model
load_env_files()


class Settings(BaseSettings):
    model_config = SettingsConfigDict(env_prefix="HFNEWTON_", extra="ignore")

    # Logging
    LOG_LEVEL: str = "INFO"
    LOG_TO_FILE: bool = False

    # Paths
    OUTPUT_ROOT: Path = Path("bench_outputs")
    DATA_DIR: Path = Path("data")

    # Solver caps and floors
    MAX_TRIALS: int = 60
    H_MIN: float = 1e-10
    CG_CAP_FACTOR: int = 10
    CUBIC_GD_CAP: int = 5000
    FD_JOBS: int = 1

    # Benchmark conventions
    FAILURE_TIME: float = 1e5
    DESK_MAX_OUTER: int = 500
    PAPER_MAX_OUTER: int = 4000

    def __init__(self, **data):
        # Load from config file if it exists
        if CONFIG_FILE.exists():
            with open(CONFIG_FILE, "r") as f:
                config_data = json.load(f)
            for key in ("OUTPUT_ROOT", "DATA_DIR"):
                if key in config_data:
                    path = Path(config_data[key])
                    if not path.is_absolute():
                        path = ROOT_DIR / path
                    config_data[key] = path
            config_data.update(data)
            data = config_data
        super().__init__(**data)

    @property
    def LOGS_DIR(self) -> Path:
        return self.OUTPUT_ROOT / "logs"

    def ensure_directories(self):
        """Ensure all necessary directories exist."""
        for dir_path in [self.OUTPUT_ROOT, self.LOGS_DIR]:
            dir_path.mkdir(parents=True, exist_ok=True)


# Shared settings instance
settings = Settings()
