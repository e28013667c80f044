"""
Endpoints de traitement des expressions en notation indicielle.

- parse : élaboration et dump de l'arbre
- evaluate : tenseur résultant au format JSON des fichiers
- simplify : forme normale (avec étapes optionnelles)
- prove-eq : verdict de comparaison des deux membres d'une égalité
"""

from fastapi import APIRouter

from app.core.error_handler import InvalidInputError, handle_exceptions
from app.core.logging import get_logger
from app.models.api import (
    ExpressionRequest,
    ProveEqRequest,
    SimplifyRequest,
    SimplifyResponse,
    TensorResponse,
    TreeResponse,
    VerdictResponse,
)
from app.models.files import TensorFile, environment_from_json
from app.services.lorentz import SPECIES_NAME, lorentz_environment
from app.services.rewrite import check_equal, normalize_with_trace
from app.services.species import get_species
from app.services.syntax import Environment, elaborate_text
from app.services.tree import dump, semantics

logger = get_logger(__name__)

router = APIRouter(prefix="/api/v1/expressions", tags=["expressions"])


def _environment(request: ExpressionRequest) -> Environment:
    species = get_species(request.species)
    env = lorentz_environment() if species.name == SPECIES_NAME else Environment()
    if request.env:
        env = env.merged(environment_from_json(request.env, species))
    return env


def _single_tree(request: ExpressionRequest):
    result = elaborate_text(request.expression, _environment(request))
    if isinstance(result, tuple):
        raise InvalidInputError("Expression sans '=' attendue", details={"expression": request.expression})
    return result


@router.post("/parse", response_model=TreeResponse, summary="Élabore une expression")
@handle_exceptions("expressions.parse")
def parse_expression(request: ExpressionRequest) -> TreeResponse:
    result = elaborate_text(request.expression, _environment(request))
    if isinstance(result, tuple):
        lhs, rhs = result
        return TreeResponse(lhs=dump(lhs), rhs=dump(rhs), signature=list(lhs.signature))
    return TreeResponse(tree=dump(result), signature=list(result.signature))


@router.post("/evaluate", response_model=TensorResponse, summary="Évalue une expression")
@handle_exceptions("expressions.evaluate")
def evaluate_expression(request: ExpressionRequest) -> TensorResponse:
    return TensorResponse(tensor=TensorFile.from_tensor(semantics(_single_tree(request))))


@router.post("/simplify", response_model=SimplifyResponse, summary="Normalise une expression")
@handle_exceptions("expressions.simplify")
def simplify_expression(request: SimplifyRequest) -> SimplifyResponse:
    result, steps = normalize_with_trace(_single_tree(request), trace=request.trace)
    return SimplifyResponse(tree=dump(result), steps=steps)


@router.post("/prove-eq", response_model=VerdictResponse, summary="Compare les deux membres d'une égalité")
@handle_exceptions("expressions.prove_eq")
def prove_equality(request: ProveEqRequest) -> VerdictResponse:
    """
    Compare les deux membres.

    Un verdict not_equal est une réponse 200, pas une erreur.
    """
    result = elaborate_text(request.expression, _environment(request))
    if not isinstance(result, tuple):
        raise InvalidInputError("Égalité 'A = B' attendue", details={"expression": request.expression})
    lhs, rhs = result
    verdict = check_equal(lhs, rhs, tol=request.tol, samples=request.samples, seed=request.seed)
    logger.info("prove_eq", kind=verdict.kind)
    return VerdictResponse(verdict=verdict)
