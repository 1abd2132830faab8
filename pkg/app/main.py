import logging

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from app.api.v1 import api_router
from app.core.config import get_settings
from app.core.errors import InternalCheckError

settings = get_settings()

logging.basicConfig(
    level=getattr(logging, settings.log_level.upper(), logging.INFO),
    format="%(asctime)s %(levelname)s %(name)s: %(message)s",
)

app = FastAPI(
    title=settings.app_name,
    debug=settings.debug,
    docs_url="/docs",
    redoc_url="/redoc"
)

# Include API routes
app.include_router(api_router)


@app.exception_handler(InternalCheckError)
async def internal_check_handler(request: Request, exc: InternalCheckError):
    logging.getLogger(__name__).error("internal check failed on %s: %s", request.url.path, exc)
    return JSONResponse(status_code=500, content={"detail": f"internal check failed: {exc}"})


if __name__ == "__main__":
    import uvicorn
    uvicorn.run("app.main:app", host="0.0.0.0", port=8000, reload=True)
