from functools import lru_cache
from pathlib import Path

from app.core.config import get_settings
from app.services.seifert import KnotRecord, load_knots

__all__ = ["get_records"]


@lru_cache(maxsize=8)
def _load(path: Path) -> tuple[KnotRecord, ...]:
    return tuple(load_knots(path))


def get_records() -> list[KnotRecord]:
    """
    FastAPI dependency for the knot table
    Parsed once per file and shared across requests
    """
    return list(_load(get_settings().knots_file))
