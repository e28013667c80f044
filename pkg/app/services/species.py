"""
Espèces de tenseurs.

Une espèce regroupe les couleurs d'indices, la dualité τ, la dimension et la
représentation de chaque couleur, ainsi que les données de contraction, d'unité
et de métrique. Les quatre axiomes sont vérifiés numériquement par sommation
explicite (voir check_axioms).
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Callable, Mapping

import numpy as np

from app.core.config import SPECIES_ALIASES, settings
from app.core.error_handler import (
    GroupElementError,
    InvalidInputError,
    UnknownColorError,
    UnknownConstantError,
)
from app.core.logging import get_logger
from app.models.reports import AxiomReport, ColorAxiomResult, InvarianceReport

logger = get_logger(__name__)

Color = str

GROUP_DET_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class GroupElement:
    """
    Élément du groupe de symétrie.

    Matrice 2×2 de SL(2,ℂ) pour l'espèce de Lorentz, phase 1×1 de module 1
    pour l'espèce unité.
    """

    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = np.array(self.matrix, dtype=np.complex128)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
            raise GroupElementError(
                "Un élément de groupe doit être une matrice carrée non vide",
                details={"shape": list(m.shape)}
            )
        det = complex(np.linalg.det(m))
        if m.shape[0] == 1:
            deviation = abs(abs(det) - 1.0)
        else:
            deviation = abs(det - 1.0)
        if deviation > GROUP_DET_TOL:
            raise GroupElementError(
                f"Déterminant invalide pour un élément de groupe: {det}",
                details={"det": [det.real, det.imag], "deviation": deviation}
            )
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def identity(cls, size: int = 2) -> GroupElement:
        return cls(np.eye(size, dtype=np.complex128))

    def __matmul__(self, other: GroupElement) -> GroupElement:
        return GroupElement(self.matrix @ other.matrix)

    def inverse(self) -> GroupElement:
        return GroupElement(np.linalg.inv(self.matrix))


def sample_sl2c(rng: np.random.Generator) -> GroupElement:
    """
    Tire un élément aléatoire de SL(2,ℂ).

    Entrées uniformes dans le disque unité, tirage répété tant que |det| ≤ 0.1,
    puis normalisation par det^(-1/2).
    """
    while True:
        radius = np.sqrt(rng.uniform(0.0, 1.0, size=(2, 2)))
        angle = rng.uniform(0.0, 2.0 * np.pi, size=(2, 2))
        m = radius * np.exp(1j * angle)
        det = np.linalg.det(m)
        if abs(det) > 0.1:
            return GroupElement(m / np.sqrt(det))


def sample_phase(rng: np.random.Generator) -> GroupElement:
    """Tire une phase de module 1 (groupe de l'espèce unité)."""
    return GroupElement(np.array([[np.exp(1j * rng.uniform(0.0, 2.0 * np.pi))]]))


def _frozen(arrays: Mapping[Color, np.ndarray]) -> Mapping[Color, np.ndarray]:
    out = {}
    for key, value in arrays.items():
        arr = np.array(value, dtype=np.complex128)
        arr.setflags(write=False)
        out[key] = arr
    return MappingProxyType(out)


@dataclass(frozen=True, eq=False)
class TensorSpecies:
    """
    Structure algébrique d'une famille de tenseurs.

    Attributes:
        name: Identifiant de l'espèce ("complex-lorentz", "unit").
        colors: Couleurs dans l'ordre de déclaration.
        tau: Involution de dualité.
        dims: Dimension de la représentation de chaque couleur.
        representation: (couleur, élément) -> matrice de la représentation.
        contr_forms: K_c, de forme dim(c) × dim(τ c).
        units: unité de la couleur c, de forme dim(τ c) × dim(c).
        metrics: métrique de la couleur c, de forme dim(c) × dim(c).
        group_size: Taille des matrices du groupe.
        sampler: Générateur d'éléments aléatoires du groupe.
    """

    name: str
    colors: tuple[Color, ...]
    tau: Mapping[Color, Color]
    dims: Mapping[Color, int]
    representation: Callable[[Color, GroupElement], np.ndarray]
    contr_forms: Mapping[Color, np.ndarray]
    units: Mapping[Color, np.ndarray]
    metrics: Mapping[Color, np.ndarray]
    group_size: int = 2
    sampler: Callable[[np.random.Generator], GroupElement] = field(default=sample_sl2c)

    def __post_init__(self) -> None:
        if not self.colors:
            raise UnknownColorError("Une espèce doit avoir au moins une couleur")
        object.__setattr__(self, "colors", tuple(str(c) for c in self.colors))
        object.__setattr__(self, "tau", MappingProxyType({str(k): str(v) for k, v in self.tau.items()}))
        object.__setattr__(self, "dims", MappingProxyType({str(k): int(v) for k, v in self.dims.items()}))
        object.__setattr__(self, "contr_forms", _frozen(self.contr_forms))
        object.__setattr__(self, "units", _frozen(self.units))
        object.__setattr__(self, "metrics", _frozen(self.metrics))

        for c in self.colors:
            dual = self.tau.get(c)
            if dual not in self.colors or self.tau.get(dual) != c:
                raise UnknownColorError(
                    f"τ n'est pas une involution sur la couleur '{c}'",
                    details={"species": self.name, "color": c}
                )
            if self.dims.get(c, 0) < 1:
                raise UnknownColorError(
                    f"Dimension nulle ou absente pour la couleur '{c}'",
                    details={"species": self.name, "color": c}
                )
        for c in self.colors:
            d, dd = self.dims[c], self.dims[self.tau[c]]
            expected = {
                "contr_forms": (d, dd),
                "units": (dd, d),
                "metrics": (d, d),
            }
            for attr, shape in expected.items():
                arr = getattr(self, attr).get(c)
                if arr is None or arr.shape != shape:
                    raise UnknownColorError(
                        f"Donnée '{attr}' absente ou de forme invalide pour '{c}'",
                        details={"species": self.name, "color": c, "expected": list(shape)}
                    )

    def check_color(self, c: Color) -> Color:
        if c not in self.dims:
            raise UnknownColorError(
                f"Couleur '{c}' inconnue pour l'espèce '{self.name}'",
                details={"species": self.name, "color": c, "colors": list(self.colors)}
            )
        return c

    def dual(self, c: Color) -> Color:
        return self.tau[self.check_color(c)]

    def rep_dim(self, c: Color) -> int:
        return self.dims[self.check_color(c)]

    def rep_matrix(self, c: Color, g: GroupElement) -> np.ndarray:
        self.check_color(c)
        if g.size != self.group_size:
            raise GroupElementError(
                f"L'espèce '{self.name}' attend des éléments de taille {self.group_size}",
                details={"size": g.size}
            )
        return np.asarray(self.representation(c, g), dtype=np.complex128)

    def contr_form(self, c: Color) -> np.ndarray:
        return self.contr_forms[self.check_color(c)]

    def unit_vec(self, c: Color) -> np.ndarray:
        return self.units[self.check_color(c)]

    def metric_vec(self, c: Color) -> np.ndarray:
        return self.metrics[self.check_color(c)]

    def identity_element(self) -> GroupElement:
        return GroupElement.identity(self.group_size)

    def sample_group(self, rng: np.random.Generator) -> GroupElement:
        return self.sampler(rng)

    def with_metric(self, c: Color, metric: np.ndarray) -> TensorSpecies:
        """Copie de l'espèce avec la métrique de la couleur c remplacée."""
        self.check_color(c)
        metrics = dict(self.metrics)
        metrics[c] = np.asarray(metric, dtype=np.complex128)
        return dataclasses.replace(self, metrics=metrics)

    def __repr__(self) -> str:
        return f"TensorSpecies({self.name!r}, colors={list(self.colors)})"


def dual_color(species: TensorSpecies, c: Color) -> Color:
    """Retourne τ(c)."""
    return species.dual(c)


def contraction_form(species: TensorSpecies, c: Color) -> np.ndarray:
    """Retourne K_c, l'appariement de la couleur c avec sa duale."""
    return species.contr_form(c)


def _max_dev(a: np.ndarray, b: np.ndarray) -> float:
    if a.shape != b.shape:
        return float("inf")
    if a.size == 0:
        return 0.0
    return float(np.max(np.abs(a - b)))


def check_axioms(species: TensorSpecies, tol: float | None = None) -> AxiomReport:
    """
    Vérifie les quatre axiomes d'espèce couleur par couleur.

    Args:
        species: Espèce à auditer.
        tol: Tolérance (écart absolu maximal), settings.combinatorial_tol par défaut.

    Returns:
        Rapport listant, pour chaque couleur, le résultat et l'écart de chaque axiome.
    """
    tol = settings.combinatorial_tol if tol is None else tol
    if tol <= 0:
        raise InvalidInputError("La tolérance doit être strictement positive", details={"tol": tol})

    results = []
    for c in species.colors:
        dc = species.dual(c)
        k_c, k_dc = species.contr_form(c), species.contr_form(dc)
        u_c, u_dc = species.unit_vec(c), species.unit_vec(dc)
        m_c, m_dc = species.metric_vec(c), species.metric_vec(dc)

        # (1) K_c[x][y] = K_τc[y][x]
        dev_symm = _max_dev(k_c, k_dc.T)
        # (2) unit(c)[a][b] = unit(τc)[b][a]
        dev_unit_symm = _max_dev(u_c, u_dc.T)
        # (3) Σ_y K_c[x][y] unit(c)[y][z] = δ_xz
        dev_contr_unit = _max_dev(
            np.einsum("xy,yz->xz", k_c, u_c),
            np.eye(species.rep_dim(c), dtype=np.complex128)
        )
        # (4) Σ metric(c)[x][y] K_c[y][y'] metric(τc)[y'][z], tressé, redonne unit(c)
        contracted = np.einsum("xy,yw,wz->xz", m_c, k_c, m_dc)
        dev_contr_metric = _max_dev(contracted.T, u_c)

        results.append(ColorAxiomResult(
            color=c,
            contr_tmul_symm=dev_symm <= tol,
            unit_symm=dev_unit_symm <= tol,
            contr_unit=dev_contr_unit <= tol,
            contr_metric=dev_contr_metric <= tol,
            deviations={
                "contr_tmul_symm": dev_symm,
                "unit_symm": dev_unit_symm,
                "contr_unit": dev_contr_unit,
                "contr_metric": dev_contr_metric,
            },
        ))

    report = AxiomReport(species=species.name, tol=tol, colors=results)
    if not report.all_passed:
        logger.warning("axiomes_en_echec", species=species.name, failures=report.failures())
    else:
        logger.info("axiomes_ok", species=species.name, tol=tol)
    return report


def check_invariance(
    species: TensorSpecies,
    samples: int = 50,
    tol: float | None = None,
    seed: int | None = None,
) -> InvarianceReport:
    """
    Vérifie les propriétés de la représentation sur des éléments aléatoires.

    Homomorphisme, équivariance de K_c, invariance de l'unité et de la métrique.
    """
    tol = settings.invariance_tol if tol is None else tol
    rng = np.random.default_rng(settings.random_seed if seed is None else seed)
    worst = {"identity": 0.0, "homomorphism": 0.0, "contraction": 0.0, "unit": 0.0, "metric": 0.0}

    identity = species.identity_element()
    for c in species.colors:
        eye = np.eye(species.rep_dim(c), dtype=np.complex128)
        worst["identity"] = max(worst["identity"], _max_dev(species.rep_matrix(c, identity), eye))

    for _ in range(samples):
        g, h = species.sample_group(rng), species.sample_group(rng)
        gh = g @ h
        for c in species.colors:
            dc = species.dual(c)
            r_c, r_dc = species.rep_matrix(c, g), species.rep_matrix(dc, g)
            worst["homomorphism"] = max(
                worst["homomorphism"],
                _max_dev(species.rep_matrix(c, gh), r_c @ species.rep_matrix(c, h))
            )
            k = species.contr_form(c)
            worst["contraction"] = max(worst["contraction"], _max_dev(r_c.T @ k @ r_dc, k))
            u = species.unit_vec(c)
            worst["unit"] = max(worst["unit"], _max_dev(r_dc @ u @ r_c.T, u))
            m = species.metric_vec(c)
            worst["metric"] = max(worst["metric"], _max_dev(r_c @ m @ r_c.T, m))

    return InvarianceReport(
        species=species.name,
        samples=samples,
        tol=tol,
        deviations=worst,
        passed={name: dev <= tol for name, dev in worst.items()},
    )


def _trivial_representation(c: Color, g: GroupElement) -> np.ndarray:
    return np.ones((1, 1), dtype=np.complex128)


UNIT_COLOR: Color = "u"


def build_unit_species() -> TensorSpecies:
    """
    Espèce synthétique : une couleur auto-duale de dimension 1.

    Toutes les données valent [[1]] et la représentation est triviale.
    """
    one = np.ones((1, 1), dtype=np.complex128)
    return TensorSpecies(
        name="unit",
        colors=(UNIT_COLOR,),
        tau={UNIT_COLOR: UNIT_COLOR},
        dims={UNIT_COLOR: 1},
        representation=_trivial_representation,
        contr_forms={UNIT_COLOR: one},
        units={UNIT_COLOR: one},
        metrics={UNIT_COLOR: one},
        group_size=1,
        sampler=sample_phase,
    )


UNIT_SPECIES = build_unit_species()


def get_species(name: str) -> TensorSpecies:
    """Résout une espèce par nom (alias acceptés)."""
    canonical = SPECIES_ALIASES.get(name.strip().lower())
    if canonical == "unit":
        return UNIT_SPECIES
    if canonical == "complex-lorentz":
        from app.services.lorentz import build_species
        return build_species()
    raise UnknownConstantError(name, known=["complex-lorentz", "unit"])
