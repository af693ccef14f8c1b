from functools import lru_cache
from pathlib import Path

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
	# Output locations (loaded from .env or the process environment)
	RUNS_ROOT: str = str((Path(__file__).resolve().parent.parent / "runs").resolve())
	SCM_CONFIG: str | None = None

	# Runtime controls
	TORCH_THREADS: int = 1
	EVAL_WORKERS: int = 1
	LOG_LEVEL: str = "INFO"

	model_config = SettingsConfigDict(
		env_prefix="CAUSALREP_",
		env_file=".env",
		env_file_encoding="utf-8",
		extra="ignore",
	)


@lru_cache()
def get_settings() -> Settings:
	return Settings()
