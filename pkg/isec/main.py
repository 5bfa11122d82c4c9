"""FastAPI application entrypoint."""

from contextlib import asynccontextmanager

from fastapi import FastAPI

from isec.api.analysis import router as analysis_router
from isec.core.config import get_settings
from isec.infrastructure.cache import FrontierCache


@asynccontextmanager
async def lifespan(app: FastAPI):
    """Load settings and create the frontier cache."""
    settings = get_settings()
    app.state.settings = settings
    app.state.cache = FrontierCache(max_entries=settings.cache_size)
    try:
        yield
    finally:
        app.state.cache.clear()


app = FastAPI(title="isec", lifespan=lifespan)
app.include_router(analysis_router)
