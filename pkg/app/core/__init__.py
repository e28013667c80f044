"""
Core components pour TensorIndex.

Modules:
- config: Configuration Pydantic Settings
- logging: Configuration structlog
- error_handler: Catégories d'erreur, codes de sortie et statuts HTTP
"""

from app.core.config import settings

__all__ = ["settings"]
