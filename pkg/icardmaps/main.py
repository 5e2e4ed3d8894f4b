"""
icardmaps - FastAPI Application Entry Point

HTTP mirror of the icardmaps command line:
1. Ordinal calculator and Icard topology ranks
2. GL prover, countermodels and bouquet model checking
3. D-map evaluation, preimage witnesses and certificate selftests
4. End-to-end strong-completeness witnesses
"""
import logging
from contextlib import asynccontextmanager

from fastapi import FastAPI, Request, status
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from icardmaps import __version__
from icardmaps.routers import bouquets, config, dmaps, gl, ordinals, reports, satisfy, topology
from icardmaps.services import config_manager, file_ops
from icardmaps.services.bouquet import bouquet_to_json
from icardmaps.services.errors import IcardError, http_status_for
from icardmaps.services.log_setup import configure_logging
from icardmaps.services.synthetic_data import sample_bouquets

logger = logging.getLogger(__name__)


def initialize_application():
    """
    Initialize the application on startup.

    Ensures:
    1. Default directories exist
    2. Active engine config exists and validates
    3. Sample bouquet files exist under bouquets/
    """
    file_ops.ensure_base_directories()
    config = config_manager.validate_config(config_manager.get_active_config())

    existing = file_ops.list_files(file_ops.BOUQUETS_DIR, ".json")
    for name, b in sample_bouquets().items():
        if f"{name}.json" not in existing:
            file_ops.write_json(f"{file_ops.BOUQUETS_DIR}/{name}.json", bouquet_to_json(b))
            logger.info("wrote sample bouquet %s", name)

    logger.info("icardmaps initialized (default lambda %s, budget %d)", config.default_lambda, config.budget)


@asynccontextmanager
async def lifespan(app: FastAPI):
    """
    Application lifespan manager.
    Handles startup and shutdown events.
    """
    configure_logging(logging.INFO)
    initialize_application()
    yield
    logger.info("icardmaps shutting down")


app = FastAPI(
    title="icardmaps",
    description="Ordinal Icard spaces, GL and d-maps onto omega-bouquets",
    version=__version__,
    lifespan=lifespan,
)


@app.exception_handler(RequestValidationError)
async def validation_exception_handler(request: Request, exc: RequestValidationError):
    logger.warning("validation error on %s %s: %s", request.method, request.url.path, exc.errors())
    return JSONResponse(
        status_code=status.HTTP_422_UNPROCESSABLE_ENTITY,
        content={
            "detail": exc.errors(),
            "message": "Validation failed - check the request data format",
        },
    )


@app.exception_handler(IcardError)
async def icard_exception_handler(request: Request, exc: IcardError):
    code = http_status_for(exc)
    if code >= 500:
        logger.error("%s on %s %s: %s", type(exc).__name__, request.method, request.url.path, exc)
    return JSONResponse(status_code=code, content={"detail": str(exc), "error": type(exc).__name__})


app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

app.include_router(ordinals.router)
app.include_router(topology.router)
app.include_router(gl.router)
app.include_router(bouquets.router)
app.include_router(dmaps.router)
app.include_router(satisfy.router)
app.include_router(config.router)
app.include_router(reports.router)


@app.get("/")
async def root():
    """Root endpoint with API information."""
    return {
        "name": "icardmaps",
        "version": __version__,
        "docs": "/docs",
        "endpoints": {
            "ordinals": "/api/ordinals",
            "topology": "/api/topology",
            "gl": "/api/gl",
            "bouquets": "/api/bouquets",
            "dmaps": "/api/dmaps",
            "satisfy": "/api/satisfy",
            "config": "/api/config",
            "reports": "/api/reports",
        },
    }


@app.get("/health")
async def health_check():
    """Health check endpoint."""
    return {"status": "healthy"}
