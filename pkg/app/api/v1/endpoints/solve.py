"""
Single endpoint solving one benchmark system
"""
from fastapi import APIRouter, Depends, HTTPException
from fastapi.concurrency import run_in_threadpool

from app.core.errors import ConfigurationError, ContractViolation, RadiativeSolverError
from app.schemas.solve import SolveRequest, SolveResponse
from app.services.solve_service import SolveService

router = APIRouter()


# Dependency to get the service
async def get_solve_service() -> SolveService:
    return SolveService()


@router.post("/solve", response_model=SolveResponse)
async def solve_system(
    request: SolveRequest,
    service: SolveService = Depends(get_solve_service),
) -> SolveResponse:
    """
    Build A = Id - J Lambda T and b for the requested grid, then solve it

    **Input**: grid sizes, formal solver, method, preconditioner and iteration controls
    **Output**: iteration count, final relative residual, operator application counts

    Non-convergence is not an error: the response carries `converged=false` and the status.
    """
    try:
        return await run_in_threadpool(service.solve, request)
    except (ConfigurationError, ContractViolation) as e:
        raise HTTPException(status_code=400, detail=str(e))
    except RadiativeSolverError as e:
        raise HTTPException(status_code=422, detail=f"Solver failure: {e}")
    except Exception as e:
        raise HTTPException(status_code=500, detail=f"Internal server error: {str(e)}")
