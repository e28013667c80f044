"""
Point d'entrée HTTP de TensorIndex.

FastAPI application avec:
- Endpoints d'élaboration, d'évaluation, de normalisation et de comparaison
- Audit des axiomes d'espèce et export des constantes de Lorentz
- Middleware de logging
- Gestion globale des erreurs
"""

from contextlib import asynccontextmanager
from datetime import datetime, timezone

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from app.core.config import SPECIES_ALIASES, settings
from app.core.error_handler import TensorIndexError, global_exception_handler
from app.core.logging import get_logger

logger = get_logger(__name__)

VERSION = "1.0.0"


@asynccontextmanager
async def lifespan(app: FastAPI):
    """
    Gestionnaire de cycle de vie de l'application.

    Au démarrage, construit les constantes de Lorentz (mises en cache).
    """
    logger.info("demarrage", app=settings.app_name, env=settings.app_env)
    logger.info("api", host=settings.api_host, port=settings.api_port)

    try:
        from app.services.lorentz import lorentz_constants
        constants = lorentz_constants()
        logger.info("constantes_chargees", count=len(constants.names()))
    except Exception as e:
        logger.error("constantes_en_erreur", error=str(e))

    yield

    logger.info("arret", app=settings.app_name)


app = FastAPI(
    title=settings.app_name,
    description="""
    ## TensorIndex - notation indicielle pour tenseurs

    ### Endpoints:
    - **expressions**: parse, evaluate, simplify, prove-eq
    - **species**: audit des axiomes, constantes de Lorentz

    Les expressions s'écrivent `{ ... }ᵀ` (alias ASCII acceptés : `(x)`, `*.`, `@.`, `}T`).
    """,
    version=VERSION,
    docs_url="/docs" if settings.debug else None,
    redoc_url="/redoc" if settings.debug else None,
    openapi_url="/openapi.json" if settings.debug else None,
    lifespan=lifespan
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_methods=["GET", "POST"],
    allow_headers=["*"],
)


@app.middleware("http")
async def log_requests(request: Request, call_next):
    """Log toutes les requêtes entrantes."""
    start_time = datetime.now(timezone.utc)
    logger.info("requete", method=request.method, path=request.url.path)

    response = await call_next(request)

    process_time = (datetime.now(timezone.utc) - start_time).total_seconds()
    logger.info(
        "reponse",
        method=request.method,
        path=request.url.path,
        status=response.status_code,
        seconds=round(process_time, 3),
    )
    response.headers["X-Process-Time"] = str(process_time)
    return response


@app.exception_handler(TensorIndexError)
async def tensorindex_exception_handler(request: Request, exc: TensorIndexError):
    """Handler pour les exceptions TensorIndex."""
    return await global_exception_handler(request, exc)


@app.exception_handler(Exception)
async def generic_exception_handler(request: Request, exc: Exception):
    """Handler pour toutes les autres exceptions."""
    return await global_exception_handler(request, exc)


# === Routes de base ===

@app.get("/", tags=["health"])
async def root():
    """Page d'accueil de l'API."""
    return {
        "name": settings.app_name,
        "version": VERSION,
        "status": "running",
        "environment": settings.app_env,
        "timestamp": datetime.now(timezone.utc).isoformat()
    }


@app.get("/health", tags=["health"])
async def health_check():
    """
    Endpoint de health check.

    Vérifie que chaque espèce se construit.
    """
    from app.services.species import get_species

    health_status = {
        "status": "healthy",
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "species": {}
    }
    for name in sorted(set(SPECIES_ALIASES.values())):
        try:
            species = get_species(name)
            health_status["species"][name] = f"ok ({len(species.colors)} couleurs)"
        except Exception as e:
            health_status["species"][name] = f"error: {str(e)[:50]}"
            health_status["status"] = "degraded"

    status_code = 200 if health_status["status"] == "healthy" else 503
    return JSONResponse(content=health_status, status_code=status_code)


@app.get("/ready", tags=["health"])
async def readiness_check():
    """Vérifie que l'application est prête à recevoir du trafic."""
    return {"status": "ready", "timestamp": datetime.now(timezone.utc).isoformat()}


# === Import des routers ===

from app.api.expressions import router as expressions_router  # noqa: E402
from app.api.species import router as species_router  # noqa: E402

app.include_router(expressions_router)
app.include_router(species_router)


if __name__ == "__main__":
    import uvicorn

    uvicorn.run(
        "app.main:app",
        host=settings.api_host,
        port=settings.api_port,
        reload=settings.debug,
        log_level="debug" if settings.debug else "info"
    )
