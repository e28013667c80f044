"""
Endpoints d'audit des espèces et des constantes de Lorentz.
"""

from typing import Optional

from fastapi import APIRouter, Query

from app.core.error_handler import handle_exceptions
from app.models.api import ConstantsResponse
from app.models.files import TensorFile
from app.models.reports import AxiomReport
from app.services.lorentz import SPECIES_NAME, lorentz_constants
from app.services.species import check_axioms, get_species

router = APIRouter(prefix="/api/v1/species", tags=["species"])


@router.get("/complex-lorentz/constants", response_model=ConstantsResponse, summary="Constantes de Lorentz")
@handle_exceptions("species.constants")
def list_constants() -> ConstantsResponse:
    constants = lorentz_constants()
    return ConstantsResponse(
        species=SPECIES_NAME,
        constants={name: TensorFile.from_tensor(t, name) for name, t in constants.tensors.items()},
    )


@router.get("/{species}/axioms", response_model=AxiomReport, summary="Audit des axiomes")
@handle_exceptions("species.axioms")
def species_axioms(
    species: str,
    tol: Optional[float] = Query(default=None, gt=0, description="Tolérance"),
) -> AxiomReport:
    """Rapport des quatre axiomes, couleur par couleur (200 même en cas d'échec)."""
    return check_axioms(get_species(species), tol)
