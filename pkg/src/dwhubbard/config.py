from pydantic import BaseModel
from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    model_config = {"env_file": ".env", "env_file_encoding": "utf-8", "env_prefix": "DW_HUBBARD_"}

    # Default directory for CLI output files (overridden by --out)
    output_dir: str = "out"


class Defaults(BaseModel):
    """Fixed run defaults; not read from the environment."""

    # Presets shipped with the repository
    presets_path: str = "config/presets.yaml"

    # Sweep workers; 1 runs sequentially in-process (overridden by --threads)
    threads: int = 1

    # Production DVR grid size (overridden by trap.n_points)
    dvr_points: int = 513

    log_level: str = "INFO"


settings = Settings()
defaults = Defaults()
