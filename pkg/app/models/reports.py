"""
Modèles Pydantic des rapports produits par TensorIndex.

Définit les schémas pour:
- Audit des axiomes d'espèce
- Vérification d'invariance de la représentation
- Verdicts d'égalité d'arbres
- Étapes de réécriture (mode trace)
- Résultats du selftest
"""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field


AXIOM_NAMES = ("contr_tmul_symm", "unit_symm", "contr_unit", "contr_metric")

VerdictKind = Literal["equal_by_normal_form", "equal_numerically", "not_equal"]


class ColorAxiomResult(BaseModel):
    """Résultat des quatre axiomes pour une couleur."""

    color: str
    contr_tmul_symm: bool
    unit_symm: bool
    contr_unit: bool
    contr_metric: bool
    deviations: dict[str, float] = Field(default_factory=dict)

    @property
    def all_passed(self) -> bool:
        return all(getattr(self, name) for name in AXIOM_NAMES)

    def failed_axioms(self) -> list[str]:
        return [name for name in AXIOM_NAMES if not getattr(self, name)]


class AxiomReport(BaseModel):
    """Rapport d'audit des axiomes d'une espèce."""

    species: str
    tol: float
    colors: list[ColorAxiomResult]

    @property
    def all_passed(self) -> bool:
        return all(result.all_passed for result in self.colors)

    def failures(self) -> list[dict]:
        """Liste des couples (couleur, axiome) en échec."""
        return [
            {"color": result.color, "axiom": axiom, "deviation": result.deviations.get(axiom)}
            for result in self.colors
            for axiom in result.failed_axioms()
        ]

    def result_for(self, color: str) -> ColorAxiomResult:
        for result in self.colors:
            if result.color == color:
                return result
        raise KeyError(color)

    def to_text(self) -> str:
        lines = [f"species {self.species} (tol {self.tol:g})"]
        for result in self.colors:
            flags = " ".join(
                f"{name}={'ok' if getattr(result, name) else 'FAIL'}" for name in AXIOM_NAMES
            )
            lines.append(f"  {result.color}: {flags}")
        lines.append("all axioms pass" if self.all_passed else f"{len(self.failures())} failure(s)")
        return "\n".join(lines)


class InvarianceReport(BaseModel):
    """Écarts maximaux des propriétés de la représentation."""

    species: str
    samples: int
    tol: float
    deviations: dict[str, float]
    passed: dict[str, bool]

    @property
    def all_passed(self) -> bool:
        return all(self.passed.values())

    def to_text(self) -> str:
        lines = [f"invariance {self.species} ({self.samples} samples, tol {self.tol:g})"]
        for name, dev in self.deviations.items():
            lines.append(f"  {name}: max deviation {dev:.3e} {'ok' if self.passed[name] else 'FAIL'}")
        return "\n".join(lines)


class EqualityVerdict(BaseModel):
    """Verdict de check_equal."""

    model_config = ConfigDict(frozen=True)

    kind: VerdictKind
    max_deviation: float = 0.0
    witness: list[int] | None = None
    samples: int = 0
    reason: str = ""

    @property
    def is_equal(self) -> bool:
        return self.kind != "not_equal"

    def to_text(self) -> str:
        if self.kind == "equal_by_normal_form":
            return "equal (normal form)"
        if self.kind == "equal_numerically":
            suffix = f", {self.samples} samples" if self.samples else ""
            return f"equal (numerically, max deviation {self.max_deviation:.3e}{suffix})"
        witness = " ".join(str(x) for x in self.witness or [])
        detail = f" at [{witness}]" if self.witness is not None else ""
        reason = f": {self.reason}" if self.reason else ""
        return f"not equal (max deviation {self.max_deviation:.3e}{detail}){reason}"


class RewriteStep(BaseModel):
    """Une étape de réécriture : règle, chemin, dumps avant/après."""

    model_config = ConfigDict(frozen=True)

    rule: str
    path: list[str]
    before: str
    after: str

    def to_text(self) -> str:
        path = "/".join(self.path) or "."
        return f"{self.rule} @ {path}\n  - {self.before}\n  + {self.after}"


class RuleSweepResult(BaseModel):
    """Résultat d'un balayage de correction pour une règle."""

    rule: str
    species: str
    cases: int
    max_deviation: float
    passed: bool
    normalize_deviation: float = 0.0
    normalize_idempotent: bool = True

    @property
    def all_passed(self) -> bool:
        return self.passed and self.normalize_idempotent

    def to_text(self) -> str:
        status = "ok" if self.all_passed else "FAIL"
        return (
            f"{self.rule:<18} {self.species:<16} {self.cases:>4} cas  "
            f"écart {self.max_deviation:.2e}  normalize {self.normalize_deviation:.2e}  {status}"
        )
