"""
Configuration du logging structuré (structlog) pour TensorIndex.

Les logs partent sur stderr : la sortie standard reste réservée aux résultats
de la CLI (dumps d'arbres, JSON de tenseurs, rapports).
"""

from __future__ import annotations

import logging
import sys

import structlog

from app.core.config import settings

_configured = False


def configure_logging(level: str | None = None, fmt: str | None = None, force: bool = False) -> None:
    """
    Configure structlog au-dessus du logging standard.

    Args:
        level: Niveau de log (par défaut settings.log_level, DEBUG si settings.debug).
        fmt: "console" ou "json" (par défaut settings.log_format).
        force: Reconfigure même si la configuration a déjà été faite.
    """
    global _configured
    if _configured and not force:
        return

    level_name = level or ("DEBUG" if settings.debug else settings.log_level)
    numeric_level = getattr(logging, level_name.upper(), logging.WARNING)
    renderer_name = fmt or settings.log_format

    logging.basicConfig(
        level=numeric_level,
        format="%(message)s",
        stream=sys.stderr,
        force=True,
    )

    renderer = (
        structlog.processors.JSONRenderer()
        if renderer_name == "json"
        else structlog.dev.ConsoleRenderer(colors=False)
    )

    structlog.configure(
        processors=[
            structlog.stdlib.filter_by_level,
            structlog.stdlib.add_logger_name,
            structlog.stdlib.add_log_level,
            structlog.processors.TimeStamper(fmt="iso", utc=True),
            structlog.processors.StackInfoRenderer(),
            structlog.processors.format_exc_info,
            renderer,
        ],
        logger_factory=structlog.stdlib.LoggerFactory(),
        wrapper_class=structlog.stdlib.BoundLogger,
        cache_logger_on_first_use=True,
    )
    _configured = True


def get_logger(name: str) -> structlog.stdlib.BoundLogger:
    """Retourne un logger structlog nommé (configure au premier appel)."""
    configure_logging()
    return structlog.get_logger(name)
