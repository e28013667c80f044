"""
Gestionnaire d'erreurs centralisé pour TensorIndex.

- Hiérarchie d'exceptions du domaine (parse, élaboration, espèces, réécriture)
- Catégories stables avec codes de sortie CLI et statuts HTTP
- Formatage cohérent des erreurs (CLI texte/JSON et API JSON)
"""

from __future__ import annotations

import traceback
from datetime import datetime, timezone
from app.utils.compat import StrEnum
from functools import wraps
from typing import Any

from fastapi import HTTPException, Request
from fastapi.responses import JSONResponse

from app.core.logging import get_logger

logger = get_logger(__name__)


class ErrorCategory(StrEnum):
    """Catégories d'erreurs lisibles par machine."""

    NOT_EQUAL = "not-equal"
    PARSE = "parse"
    ELABORATE_ARITY = "elaborate-arity"
    ELABORATE_DUALITY = "elaborate-duality"
    ELABORATE_MULTIPLICITY = "elaborate-multiplicity"
    ENV_MISSING = "env-missing"
    ELABORATE_FREE_INDEX = "elaborate-free-index"
    AXIOMS_FAILED = "axioms-failed"
    INVALID_INPUT = "invalid-input"
    INTERNAL = "internal"


EXIT_CODES: dict[ErrorCategory, int] = {
    ErrorCategory.NOT_EQUAL: 1,
    ErrorCategory.PARSE: 2,
    ErrorCategory.ELABORATE_ARITY: 3,
    ErrorCategory.ELABORATE_DUALITY: 4,
    ErrorCategory.ELABORATE_MULTIPLICITY: 5,
    ErrorCategory.ENV_MISSING: 6,
    ErrorCategory.ELABORATE_FREE_INDEX: 7,
    ErrorCategory.AXIOMS_FAILED: 8,
    ErrorCategory.INVALID_INPUT: 9,
    ErrorCategory.INTERNAL: 70,
}


class TensorIndexError(Exception):
    """Exception de base pour TensorIndex."""

    category: ErrorCategory = ErrorCategory.INTERNAL

    def __init__(
        self,
        message: str,
        category: ErrorCategory | None = None,
        details: dict | None = None,
        status_code: int = 500
    ):
        self.message = message
        if category is not None:
            self.category = category
        self.details = details or {}
        self.status_code = status_code
        self.timestamp = datetime.now(timezone.utc).isoformat()
        super().__init__(message)

    @property
    def exit_code(self) -> int:
        """Code de sortie CLI associé à la catégorie."""
        return EXIT_CODES[self.category]

    def to_dict(self) -> dict[str, Any]:
        """Représentation JSON de l'erreur."""
        return {
            "status": "error",
            "category": str(self.category),
            "message": self.message,
            "details": self.details,
            "timestamp": self.timestamp,
        }


class InvalidInputError(TensorIndexError):
    """Entrée invalide (fichier, argument, forme de tableau...)."""

    category = ErrorCategory.INVALID_INPUT

    def __init__(self, message: str, details: dict | None = None):
        super().__init__(message, details=details, status_code=400)


class ParseError(TensorIndexError):
    """Erreur lexicale ou syntaxique, avec position en octets."""

    category = ErrorCategory.PARSE

    def __init__(self, message: str, offset: int, text: str = ""):
        self.offset = offset
        super().__init__(
            f"{message} (octet {offset})",
            details={"offset": offset, "text": text},
            status_code=400
        )


class ArityError(TensorIndexError):
    """Nombre d'indices différent du rang du tenseur."""

    category = ErrorCategory.ELABORATE_ARITY

    def __init__(self, name: str, expected: int, given: int):
        super().__init__(
            f"Le tenseur '{name}' attend {expected} indice(s), {given} donné(s)",
            details={"name": name, "expected": expected, "given": given},
            status_code=400
        )


class DualityError(TensorIndexError):
    """Deux positions contractées dont les couleurs ne sont pas duales."""

    category = ErrorCategory.ELABORATE_DUALITY

    def __init__(self, message: str, details: dict | None = None):
        super().__init__(message, details=details, status_code=400)


class MultiplicityError(TensorIndexError):
    """Un symbole d'indice apparaît plus de deux fois dans une portée."""

    category = ErrorCategory.ELABORATE_MULTIPLICITY

    def __init__(self, symbol: str, count: int):
        super().__init__(
            f"L'indice '{symbol}' apparaît {count} fois dans la même portée de contraction",
            details={"symbol": symbol, "count": count},
            status_code=400
        )


class FreeIndexMismatchError(TensorIndexError):
    """Indices libres incompatibles de part et d'autre d'un + ou d'un =."""

    category = ErrorCategory.ELABORATE_FREE_INDEX

    def __init__(self, message: str, details: dict | None = None):
        super().__init__(message, details=details, status_code=400)


class EnvironmentMissingError(TensorIndexError):
    """Nom de tenseur, scalaire ou élément de groupe absent de l'environnement."""

    category = ErrorCategory.ENV_MISSING

    def __init__(self, name: str, kind: str = "tenseur"):
        super().__init__(
            f"{kind.capitalize()} '{name}' absent de l'environnement",
            details={"name": name, "kind": kind},
            status_code=400
        )


class UnknownConstantError(TensorIndexError):
    """Constante de Lorentz ou espèce inconnue."""

    category = ErrorCategory.INVALID_INPUT

    def __init__(self, name: str, known: list[str] | None = None):
        super().__init__(
            f"Nom inconnu: '{name}'",
            details={"name": name, "known": known or []},
            status_code=404
        )


class UnknownColorError(InvalidInputError):
    """Couleur n'appartenant pas à l'espèce."""


class SpeciesMismatchError(InvalidInputError):
    """Opération entre tenseurs d'espèces différentes."""


class SignatureMismatchError(InvalidInputError):
    """Signatures incompatibles (addition, permutation, remplacement)."""


class IndexOutOfRangeError(InvalidInputError):
    """Position hors bornes."""


class GroupElementError(InvalidInputError):
    """Matrice qui n'est pas un élément valide du groupe."""


class FormatError(InvalidInputError):
    """Arbre non exprimable en notation indicielle."""


class NoMatchError(InvalidInputError):
    """La règle de réécriture ne s'applique pas au noeud visé."""

    def __init__(self, rule: str, shape: str):
        self.rule = rule
        self.shape = shape
        super().__init__(
            f"La règle '{rule}' ne s'applique pas au noeud {shape}",
            details={"rule": rule, "shape": shape}
        )


class NormalizationError(TensorIndexError):
    """La normalisation a dépassé son nombre maximal d'étapes."""

    category = ErrorCategory.INTERNAL

    def __init__(self, steps: int):
        super().__init__(
            f"Normalisation interrompue après {steps} étapes",
            details={"steps": steps},
            status_code=500
        )


class NotEqualError(TensorIndexError):
    """Les deux membres d'une égalité diffèrent."""

    category = ErrorCategory.NOT_EQUAL

    def __init__(self, message: str, details: dict | None = None):
        super().__init__(message, details=details, status_code=409)


class AxiomFailureError(TensorIndexError):
    """Au moins un axiome d'espèce échoue."""

    category = ErrorCategory.AXIOMS_FAILED

    def __init__(self, species: str, failures: list[dict]):
        super().__init__(
            f"{len(failures)} axiome(s) en échec pour l'espèce '{species}'",
            details={"species": species, "failures": failures},
            status_code=500
        )


class ErrorHandler:
    """
    Gestionnaire centralisé des erreurs.

    Transforme toute exception en dictionnaire uniforme et la journalise.
    """

    def handle_error(self, error: Exception, operation: str = "unknown") -> dict:
        """
        Gère une erreur de manière centralisée.

        Args:
            error: L'exception capturée.
            operation: Nom de l'opération (sous-commande, endpoint...).

        Returns:
            Dictionnaire avec les détails de l'erreur.
        """
        if isinstance(error, TensorIndexError):
            error_data = error.to_dict()
            error_data["exit_code"] = error.exit_code
            error_data["status_code"] = error.status_code
            logger.warning(
                "erreur_domaine",
                operation=operation,
                category=error_data["category"],
                message=error.message,
            )
        else:
            error_data = {
                "status": "error",
                "category": str(ErrorCategory.INTERNAL),
                "message": str(error) or type(error).__name__,
                "details": {
                    "type": type(error).__name__,
                    "traceback": traceback.format_exc()
                },
                "timestamp": datetime.now(timezone.utc).isoformat(),
                "exit_code": EXIT_CODES[ErrorCategory.INTERNAL],
                "status_code": 500,
            }
            logger.error("erreur_inattendue", operation=operation, message=error_data["message"])
        return error_data


# Instance globale
error_handler = ErrorHandler()


def handle_exceptions(operation: str):
    """
    Décorateur pour convertir les exceptions inattendues en TensorIndexError.

    Args:
        operation: Nom de l'opération.
    """
    def decorator(func):
        @wraps(func)
        def wrapper(*args, **kwargs):
            try:
                return func(*args, **kwargs)
            except TensorIndexError:
                raise
            except Exception as e:
                error_handler.handle_error(e, operation)
                raise TensorIndexError(
                    message=str(e) or type(e).__name__,
                    details={"original_error": type(e).__name__, "operation": operation}
                ) from e
        return wrapper
    return decorator


async def global_exception_handler(
    request: Request,
    exc: Exception
) -> JSONResponse:
    """
    Handler global pour FastAPI.

    Capture toutes les exceptions non gérées et les formate en JSON.
    """
    if isinstance(exc, TensorIndexError):
        error_handler.handle_error(exc, operation=request.url.path)
        return JSONResponse(status_code=exc.status_code, content=exc.to_dict())

    if isinstance(exc, HTTPException):
        return JSONResponse(
            status_code=exc.status_code,
            content={
                "status": "error",
                "message": exc.detail,
                "timestamp": datetime.now(timezone.utc).isoformat()
            }
        )

    error_data = error_handler.handle_error(exc, operation=request.url.path)
    return JSONResponse(
        status_code=500,
        content={
            "status": "error",
            "category": str(ErrorCategory.INTERNAL),
            "message": "Une erreur interne s'est produite",
            "timestamp": error_data["timestamp"]
        }
    )
