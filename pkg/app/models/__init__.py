"""
Modèles Pydantic pour TensorIndex.

Modules:
- reports: Rapports d'axiomes, verdicts d'égalité, étapes de réécriture
- files: Fichiers JSON d'environnement (tenseurs, scalaires, éléments de groupe)
- api: Requêtes et réponses HTTP
"""

from app.models.reports import (
    AxiomReport,
    ColorAxiomResult,
    EqualityVerdict,
    InvarianceReport,
    RewriteStep,
    RuleSweepResult,
)

__all__ = [
    "AxiomReport",
    "ColorAxiomResult",
    "EqualityVerdict",
    "InvarianceReport",
    "RewriteStep",
    "RuleSweepResult",
]
