from functools import lru_cache
from pathlib import Path

from pydantic_settings import BaseSettings, SettingsConfigDict

FIXTURES_DIR = Path(__file__).resolve().parent.parent / "fixtures"


class Settings(BaseSettings):
    app_name: str = "ckit"
    debug: bool = False
    log_level: str = "INFO"
    knots_file: Path = FIXTURES_DIR / "knots.json"
    reference_file: Path = FIXTURES_DIR / "reference_forms.json"
    galois: bool = False
    cover_primes: list[int] = [3, 5]
    max_workers: int = 4

    model_config = SettingsConfigDict(env_file=".env", env_prefix="CKIT_", extra="ignore")


@lru_cache
def get_settings() -> Settings:
    return Settings()
