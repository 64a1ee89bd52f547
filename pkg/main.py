"""
Radiative Transfer Solver API - Main application entry point
"""
import logging
import os
from contextlib import asynccontextmanager
from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware
from dotenv import load_dotenv

from app.api.v1.router import api_router
from app.core.config import settings
from app.core.logging import setup_logging

# Load environment variables
load_dotenv()
setup_logging()
logger = logging.getLogger("main")

VERSION = "1.0.0"


@asynccontextmanager
async def lifespan(app: FastAPI):
    """Application lifespan events"""
    logger.info("🚀 Radiative Transfer Solver API starting up...")
    yield
    logger.info("🛑 Radiative Transfer Solver API shutting down...")


# Create FastAPI app
app = FastAPI(
    title="Radiative Transfer Solver API",
    description="Iterative solvers and preconditioners for the polarized two-level atom benchmark",
    version=VERSION,
    lifespan=lifespan,
)

# Add CORS middleware
app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

# Include API router
app.include_router(api_router, prefix="/v1")


@app.get("/")
async def root():
    """Health check endpoint"""
    return {
        "message": "Radiative Transfer Solver API",
        "version": VERSION,
        "status": "running",
    }


@app.get("/health")
async def health_check():
    """Detailed health check"""
    return {
        "status": "healthy",
        "service": "rt-solver-api",
        "version": VERSION,
    }


if __name__ == "__main__":
    import uvicorn

    port = int(os.environ.get("PORT", settings.API_PORT))

    logger.info("🚀 Starting Radiative Transfer Solver API on %s:%d", settings.API_HOST, port)
    logger.info("📊 Debug mode: %s", settings.DEBUG)
    logger.info("⚡ Cache TTL: %ss", settings.CACHE_TTL)

    uvicorn.run(
        "main:app",
        host=settings.API_HOST,
        port=port,
        reload=settings.DEBUG,
        access_log=not settings.DEBUG,
    )
