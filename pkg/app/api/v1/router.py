"""
API v1 router
"""
from fastapi import APIRouter
from app.api.v1.endpoints import solve

# Create API router with prefix
api_router = APIRouter()

api_router.include_router(solve.router, tags=["solve"])
