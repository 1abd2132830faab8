from datetime import datetime, timezone

from fastapi import APIRouter

from app.core.config import get_settings

router = APIRouter(tags=["health"])


@router.get("/health")
async def health():
    """Health check endpoint"""
    settings = get_settings()
    return {
        "ok": True,
        "ts": datetime.now(timezone.utc).isoformat(),
        "knots_file": settings.knots_file.name,
    }
