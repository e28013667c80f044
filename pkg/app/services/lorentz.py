"""
Espèce de Lorentz complexe et ses constantes.

Six couleurs : spineurs de Weyl gauches et droits (upL, downL, upR, downR,
dimension 2) et vecteurs de Lorentz (up, down, dimension 4). Le groupe est
SL(2,ℂ), agissant sur les vecteurs par l'homomorphisme vers le groupe de
Lorentz. Les constantes dérivées (pauliCo, pauliCoDown, pauliContrDown et les
bispineurs) sont calculées en élaborant leurs expressions de définition.
"""

from __future__ import annotations

from dataclasses import dataclass
from app.utils.compat import StrEnum
from functools import lru_cache
from types import MappingProxyType
from typing import Mapping

import numpy as np

from app.core.config import settings
from app.core.error_handler import GroupElementError, SignatureMismatchError, SpeciesMismatchError, UnknownConstantError
from app.core.logging import get_logger
from app.models.reports import EqualityVerdict
from app.services.rewrite import check_equal
from app.services.species import GroupElement, TensorSpecies, check_axioms, sample_sl2c
from app.services.syntax import Environment, elaborate_text
from app.services.tensor import DenseTensor
from app.services.tree import TensorNode, semantics

logger = get_logger(__name__)

SPECIES_NAME = "complex-lorentz"


class LorentzColor(StrEnum):
    UP_L = "upL"
    DOWN_L = "downL"
    UP_R = "upR"
    DOWN_R = "downR"
    UP = "up"
    DOWN = "down"


TAU: dict[str, str] = {
    LorentzColor.UP_L: LorentzColor.DOWN_L,
    LorentzColor.DOWN_L: LorentzColor.UP_L,
    LorentzColor.UP_R: LorentzColor.DOWN_R,
    LorentzColor.DOWN_R: LorentzColor.UP_R,
    LorentzColor.UP: LorentzColor.DOWN,
    LorentzColor.DOWN: LorentzColor.UP,
}

PAULI = np.array(
    [
        [[1, 0], [0, 1]],
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=np.complex128,
)
PAULI.setflags(write=False)

# (σ⁰, -σ¹, -σ², -σ³)
PAULI_BAR = np.array([PAULI[0], -PAULI[1], -PAULI[2], -PAULI[3]])
PAULI_BAR.setflags(write=False)

MINKOWSKI = np.diag([1.0, -1.0, -1.0, -1.0]).astype(np.complex128)
EPSILON = np.array([[0, 1], [-1, 0]], dtype=np.complex128)

# Signes de (εL, εL', εR, εR') devant EPSILON.
EPSILON_SIGNS: tuple[int, int, int, int] = (1, -1, 1, -1)

PAULI_CONTRACTION = "{pauliCo | ν α β ⊗ pauliContr | ν α' β' = 2 •ₜ εL | α α' ⊗ εR | β β'}ᵀ"
ANTISYMMETRIC_SYMMETRIC = "{A | μ ν ⊗ S | μ ν = - A | μ ν ⊗ S | μ ν}ᵀ"

DERIVED_DEFINITIONS: dict[str, str] = {
    "pauliCo": "{η' | μ ν ⊗ pauliContr | ν α β}ᵀ",
    "pauliCoDown": "{pauliCo | μ α β ⊗ εL' | α α' ⊗ εR' | β β'}ᵀ",
    "pauliContrDown": "{pauliContr | μ α β ⊗ εL' | α α' ⊗ εR' | β β'}ᵀ",
}

BISPINOR_DEFINITIONS: dict[str, str] = {
    "contrUp": "{pauliCo | μ α β ⊗ p | μ}ᵀ",
    "contrDown": "{εL' | α α' ⊗ εR' | β β' ⊗ contrBispinorUp | α β}ᵀ",
    "coUp": "{pauliContr | μ α β ⊗ p | μ}ᵀ",
    "coDown": "{εL' | α α' ⊗ εR' | β β' ⊗ coBispinorUp | α β}ᵀ",
}

ASCII_ALIASES: dict[str, str] = {
    "eta": "η",
    "eta'": "η'",
    "epsL": "εL",
    "epsL'": "εL'",
    "epsR": "εR",
    "epsR'": "εR'",
    **{f"delta_{c}": f"δ_{c}" for c in LorentzColor},
}


def sl2c_to_lorentz(m: GroupElement | np.ndarray) -> np.ndarray:
    """
    Image d'un élément de SL(2,ℂ) dans le groupe de Lorentz.

    Λ^μ_ν = ½ Re tr(σ̄^μ M σ_ν M†), avec σ_ν = η_νρ σ^ρ = (σ⁰, -σ¹, -σ², -σ³) :
    les composantes de σ_ν sont celles de σ̄^ν, d'où PAULI_BAR aux deux places.

    Raises:
        GroupElementError: si M n'est pas une matrice 2×2 de déterminant 1.
    """
    element = m if isinstance(m, GroupElement) else GroupElement(np.asarray(m))
    if element.size != 2:
        raise GroupElementError(
            "SL(2,ℂ) attend une matrice 2×2",
            details={"size": element.size}
        )
    mat = element.matrix
    trace = np.einsum("mab,bc,ncd,da->mn", PAULI_BAR, mat, PAULI_BAR, mat.conj().T)
    return 0.5 * trace.real


def _representation(c: str, g: GroupElement) -> np.ndarray:
    m = g.matrix
    match c:
        case LorentzColor.UP_L:
            return m
        case LorentzColor.DOWN_L:
            return np.linalg.inv(m).T
        case LorentzColor.UP_R:
            return m.conj()
        case LorentzColor.DOWN_R:
            return np.linalg.inv(m).conj().T
        case LorentzColor.UP:
            return sl2c_to_lorentz(g).astype(np.complex128)
        case LorentzColor.DOWN:
            return np.linalg.inv(sl2c_to_lorentz(g)).T.astype(np.complex128)
    raise GroupElementError(f"Couleur sans représentation: {c}")


@lru_cache(maxsize=None)
def build_species(signs: tuple[int, int, int, int] = EPSILON_SIGNS) -> TensorSpecies:
    """
    Espèce de Lorentz complexe.

    Args:
        signs: Signes de (εL, εL', εR, εR') ; la valeur par défaut est la seule
            convention (au signe global près) qui satisfait les axiomes et
            l'identité de contraction des matrices de Pauli.
    """
    colors = tuple(str(c) for c in LorentzColor)
    dims = {c: (4 if c in (LorentzColor.UP, LorentzColor.DOWN) else 2) for c in colors}
    eye = {c: np.eye(dims[c], dtype=np.complex128) for c in colors}
    s_l, s_l_prime, s_r, s_r_prime = signs
    metrics = {
        LorentzColor.UP: MINKOWSKI,
        LorentzColor.DOWN: MINKOWSKI,
        LorentzColor.UP_L: s_l * EPSILON,
        LorentzColor.DOWN_L: s_l_prime * EPSILON,
        LorentzColor.UP_R: s_r * EPSILON,
        LorentzColor.DOWN_R: s_r_prime * EPSILON,
    }
    return TensorSpecies(
        name=SPECIES_NAME,
        colors=colors,
        tau={str(k): str(v) for k, v in TAU.items()},
        dims=dims,
        representation=_representation,
        contr_forms=eye,
        units=eye,
        metrics={str(k): v for k, v in metrics.items()},
        group_size=2,
        sampler=sample_sl2c,
    )


@dataclass(frozen=True)
class LorentzConstants:
    """Constantes de l'espèce, indexées par leur nom Unicode."""

    species: TensorSpecies
    tensors: Mapping[str, DenseTensor]

    def __getitem__(self, name: str) -> DenseTensor:
        return self.tensors[canonical_name(name)]

    def names(self) -> list[str]:
        return list(self.tensors)


def canonical_name(name: str) -> str:
    """
    Résout les alias ASCII et le prime Unicode.

    Raises:
        UnknownConstantError: nom inconnu.
    """
    key = name.strip().replace("′", "'")
    key = ASCII_ALIASES.get(key, key)
    if key not in _CONSTANT_NAMES:
        raise UnknownConstantError(name, known=list(_CONSTANT_NAMES))
    return key


_BASE_NAMES = ["η", "η'", "εL", "εL'", "εR", "εR'"] + [f"δ_{c}" for c in LorentzColor] + ["pauliContr"]
_CONSTANT_NAMES = _BASE_NAMES + list(DERIVED_DEFINITIONS)


def _base_constants(species: TensorSpecies) -> dict[str, DenseTensor]:
    def metric(c: LorentzColor) -> DenseTensor:
        return DenseTensor.from_array(species, (c, c), species.metric_vec(c))

    tensors = {
        "η": metric(LorentzColor.UP),
        "η'": metric(LorentzColor.DOWN),
        "εL": metric(LorentzColor.UP_L),
        "εL'": metric(LorentzColor.DOWN_L),
        "εR": metric(LorentzColor.UP_R),
        "εR'": metric(LorentzColor.DOWN_R),
    }
    for c in LorentzColor:
        tensors[f"δ_{c}"] = DenseTensor.from_array(species, (species.dual(c), c), species.unit_vec(c))
    tensors["pauliContr"] = DenseTensor.from_array(
        species, (LorentzColor.UP, LorentzColor.UP_L, LorentzColor.UP_R), PAULI
    )
    return tensors


@lru_cache(maxsize=None)
def lorentz_constants(signs: tuple[int, int, int, int] = EPSILON_SIGNS) -> LorentzConstants:
    """Toutes les constantes ; les dérivées sont évaluées à partir de leur définition."""
    species = build_species(signs)
    tensors = _base_constants(species)
    env = Environment(tensors=dict(tensors))
    for name, definition in DERIVED_DEFINITIONS.items():
        tensors[name] = semantics(elaborate_text(definition, env))
        env = env.bind(name, tensors[name])
    logger.debug("constantes_lorentz", species=species.name, count=len(tensors))
    return LorentzConstants(species, MappingProxyType(tensors))


def constant(name: str) -> TensorNode:
    """
    Feuille portant la constante demandée (alias ASCII acceptés).

    Raises:
        UnknownConstantError: nom inconnu.
    """
    canonical = canonical_name(name)
    return TensorNode(lorentz_constants()[canonical], canonical)


def lorentz_environment(ascii_aliases: bool = True) -> Environment:
    """Environnement où chaque constante est liée à son nom Unicode (et ses alias ASCII)."""
    constants = lorentz_constants()
    tensors = dict(constants.tensors)
    if ascii_aliases:
        tensors.update({alias: constants.tensors[target] for alias, target in ASCII_ALIASES.items()})
    return Environment(tensors=tensors)


def _check_lorentz_vector(p: DenseTensor, color: LorentzColor, kind: str) -> None:
    species = build_species()
    if p.species is not species:
        raise SpeciesMismatchError(
            "Le vecteur doit appartenir à l'espèce de Lorentz complexe",
            details={"species": p.species.name}
        )
    if p.signature != (color,):
        raise SignatureMismatchError(
            f"Le bispineur '{kind}' attend un vecteur de signature [{color}]",
            details={"kind": kind, "expected": [str(color)], "given": list(p.signature)}
        )


def bispinor(kind: str, p: DenseTensor) -> DenseTensor:
    """
    Bispineur construit à partir du vecteur p.

    Args:
        kind: contrUp, contrDown (p de signature [up]), coUp ou coDown (p de signature [down]).
        p: Vecteur de Lorentz.

    Returns:
        Tenseur de signature [upL, upR] (kinds *Up) ou [downL, downR] (kinds *Down).
    """
    if kind not in BISPINOR_DEFINITIONS:
        raise UnknownConstantError(kind, known=list(BISPINOR_DEFINITIONS))
    color = LorentzColor.UP if kind.startswith("contr") else LorentzColor.DOWN
    _check_lorentz_vector(p, color, kind)
    env = lorentz_environment(ascii_aliases=False).bind("p", p)
    if kind.endswith("Down"):
        up_kind = kind.removesuffix("Down") + "Up"
        env = env.bind(f"{up_kind.removesuffix('Up')}BispinorUp", bispinor(up_kind, p))
    return semantics(elaborate_text(BISPINOR_DEFINITIONS[kind], env))


def pauli_contraction_identity(tol: float | None = None) -> EqualityVerdict:
    """η_{μν} σ^{μαβ} σ^{να'β'} = 2 ε^{αα'} ε^{ββ'}."""
    lhs, rhs = elaborate_text(PAULI_CONTRACTION, lorentz_environment())
    return check_equal(lhs, rhs, tol=tol)


def cobispinor_down_identity(p: DenseTensor, tol: float | None = None) -> EqualityVerdict:
    """coBispinorDown(p)_{αβ} = pauliContrDown^μ_{αβ} p_μ."""
    env = lorentz_environment(ascii_aliases=False).bind("p", p).bind("coBispinorDown", bispinor("coDown", p))
    lhs, rhs = elaborate_text("{coBispinorDown | α β = pauliContrDown | μ α β ⊗ p | μ}ᵀ", env)
    return check_equal(lhs, rhs, tol=tol)


def cobispinor_up_metric_identity(p: DenseTensor, tol: float | None = None) -> EqualityVerdict:
    """coBispinorUp(p) = εL ⊗ εR contractés avec coBispinorDown(p)."""
    env = (
        lorentz_environment(ascii_aliases=False)
        .bind("coBispinorUp", bispinor("coUp", p))
        .bind("coBispinorDown", bispinor("coDown", p))
    )
    lhs, rhs = elaborate_text(
        "{coBispinorUp | α β = εL | α α' ⊗ εR | β β' ⊗ coBispinorDown | α' β'}ᵀ", env
    )
    return check_equal(lhs, rhs, tol=tol)


def antisymmetric_symmetric_identity(a: DenseTensor, s: DenseTensor, tol: float | None = None) -> EqualityVerdict:
    """A^{μν} S_{μν} = -A^{μν} S_{μν} pour A antisymétrique et S symétrique."""
    env = Environment(tensors={"A": a, "S": s})
    lhs, rhs = elaborate_text(ANTISYMMETRIC_SYMMETRIC, env)
    return check_equal(lhs, rhs, tol=tol)


@dataclass(frozen=True)
class SignCandidate:
    signs: tuple[int, int, int, int]
    axioms_passed: bool
    pauli_identity_passed: bool

    @property
    def accepted(self) -> bool:
        return self.axioms_passed and self.pauli_identity_passed


def search_epsilon_signs(tol: float | None = None) -> list[SignCandidate]:
    """
    Essaie les 16 combinaisons de signes de (εL, εL', εR, εR').

    Une combinaison est retenue si les axiomes de l'espèce et l'identité de
    contraction des matrices de Pauli (coefficient +2) sont satisfaits.
    """
    tol = settings.combinatorial_tol if tol is None else tol
    candidates = []
    for code in range(16):
        signs = tuple(-1 if code >> bit & 1 else 1 for bit in range(4))
        species = build_species(signs)
        axioms_ok = check_axioms(species, tol).all_passed
        constants = lorentz_constants(signs)
        env = Environment(tensors=dict(constants.tensors))
        lhs, rhs = elaborate_text(PAULI_CONTRACTION, env)
        deviation = semantics(lhs).max_abs_diff(semantics(rhs))
        candidates.append(SignCandidate(signs, axioms_ok, deviation <= settings.invariance_tol))
    return candidates
