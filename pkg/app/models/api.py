"""
Modèles Pydantic des requêtes et réponses HTTP.
"""

from __future__ import annotations

from typing import Any, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator

from app.core.config import SPECIES_ALIASES
from app.models.files import TensorFile
from app.models.reports import EqualityVerdict, RewriteStep


class ExpressionRequest(BaseModel):
    """Expression à traiter et environnement JSON optionnel."""

    model_config = ConfigDict(str_strip_whitespace=True)

    expression: str = Field(..., min_length=1, max_length=10_000, description="Expression { … }ᵀ")
    species: str = Field(default="complex-lorentz", description="Espèce de tenseurs")
    env: list[dict[str, Any]] = Field(default_factory=list, description="Entrées au format des fichiers d'environnement")

    @field_validator("species")
    @classmethod
    def normalize_species(cls, v: str) -> str:
        canonical = SPECIES_ALIASES.get(v.strip().lower())
        if canonical is None:
            raise ValueError(f"Espèce inconnue: {v}")
        return canonical


class SimplifyRequest(ExpressionRequest):
    trace: bool = Field(default=False, description="Retourner les étapes de réécriture")


class ProveEqRequest(ExpressionRequest):
    tol: Optional[float] = Field(default=None, gt=0)
    samples: Optional[int] = Field(default=None, ge=1, le=1000)
    seed: Optional[int] = None


class TreeResponse(BaseModel):
    status: Literal["success"] = "success"
    tree: Optional[str] = None
    lhs: Optional[str] = None
    rhs: Optional[str] = None
    signature: list[str] = Field(default_factory=list)


class TensorResponse(BaseModel):
    status: Literal["success"] = "success"
    tensor: TensorFile


class SimplifyResponse(BaseModel):
    status: Literal["success"] = "success"
    tree: str
    steps: list[RewriteStep] = Field(default_factory=list)


class VerdictResponse(BaseModel):
    status: Literal["success"] = "success"
    verdict: EqualityVerdict


class ConstantsResponse(BaseModel):
    species: str
    constants: dict[str, TensorFile]
