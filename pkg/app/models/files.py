"""
Modèles Pydantic des fichiers JSON d'environnement.

Un fichier contient un objet ou une liste d'objets :
- tenseur : {"name"?, "signature": [couleur...], "data": [[re, im], ...], "variable"?}
- scalaire : {"name", "scalar": [re, im]}
- élément de groupe : {"name", "group": [[[re, im], ...], ...]}

Les composantes sont en ordre row-major, dernier indice le plus rapide.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from app.core.error_handler import InvalidInputError
from app.services.species import GroupElement, TensorSpecies
from app.services.syntax import Environment
from app.services.tensor import DenseTensor
from app.utils.validators import complex_pair, parse_complex_pair

ComplexPair = tuple[float, float]


def _pair(value: Any) -> ComplexPair:
    z = parse_complex_pair(value)
    return (z.real, z.imag)


class TensorFile(BaseModel):
    """Tenseur dense sérialisé."""

    model_config = ConfigDict(extra="forbid")

    name: Optional[str] = Field(default=None, description="Nom de liaison dans l'environnement")
    signature: list[str] = Field(default_factory=list, description="Couleurs des positions")
    data: list[ComplexPair] = Field(..., description="Composantes [re, im] en ordre row-major")
    variable: bool = Field(default=False, description="Feuille variable pour prove-eq")

    @field_validator("data", mode="before")
    @classmethod
    def parse_components(cls, v):
        if not isinstance(v, list):
            raise InvalidInputError("'data' doit être une liste de paires [re, im]")
        return [_pair(x) for x in v]

    def to_tensor(self, species: TensorSpecies) -> DenseTensor:
        data = np.array([complex(re, im) for re, im in self.data], dtype=np.complex128)
        return DenseTensor(species, tuple(self.signature), data)

    @classmethod
    def from_tensor(cls, tensor: DenseTensor, name: str | None = None) -> TensorFile:
        return cls(
            name=name,
            signature=list(tensor.signature),
            data=[tuple(complex_pair(z)) for z in tensor.data],
        )


class ScalarFile(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: str
    scalar: ComplexPair

    @field_validator("scalar", mode="before")
    @classmethod
    def parse_scalar(cls, v):
        return _pair(v)

    @property
    def value(self) -> complex:
        return complex(*self.scalar)


class GroupFile(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: str
    group: list[list[ComplexPair]]

    @field_validator("group", mode="before")
    @classmethod
    def parse_matrix(cls, v):
        if not isinstance(v, list) or not all(isinstance(row, list) for row in v):
            raise InvalidInputError("'group' doit être une matrice de paires [re, im]")
        return [[_pair(x) for x in row] for row in v]

    def to_element(self) -> GroupElement:
        return GroupElement(np.array([[complex(re, im) for re, im in row] for row in self.group]))


def _entries(payload: Any) -> list[dict]:
    entries = payload if isinstance(payload, list) else [payload]
    if not all(isinstance(e, dict) for e in entries):
        raise InvalidInputError("Un fichier d'environnement contient des objets JSON")
    return entries


def environment_from_json(payload: Any, species: TensorSpecies, default_name: str | None = None) -> Environment:
    """
    Construit un environnement à partir du contenu JSON d'un fichier.

    Args:
        payload: Objet ou liste d'objets.
        species: Espèce des tenseurs.
        default_name: Nom d'un tenseur unique sans "name" (nom du fichier).

    Raises:
        InvalidInputError: contenu invalide.
    """
    entries = _entries(payload)
    env = Environment()
    try:
        for entry in entries:
            if "scalar" in entry:
                scalar = ScalarFile.model_validate(entry)
                env.scalars[scalar.name] = scalar.value
            elif "group" in entry:
                group = GroupFile.model_validate(entry)
                env.groups[group.name] = group.to_element()
            else:
                tensor_file = TensorFile.model_validate(entry)
                name = tensor_file.name or (default_name if len(entries) == 1 else None)
                if name is None:
                    raise InvalidInputError("Tenseur sans nom dans un fichier à plusieurs entrées")
                env = env.bind(name, tensor_file.to_tensor(species), variable=tensor_file.variable)
    except ValidationError as e:
        raise InvalidInputError(
            "Fichier d'environnement invalide",
            details={"errors": [err["msg"] for err in e.errors()]}
        ) from e
    return Environment(env.tensors, env.scalars, env.groups, env.variables)


def read_environment_file(path: str | Path, species: TensorSpecies) -> Environment:
    """Lit un fichier d'environnement ; un tenseur unique sans nom prend le nom du fichier."""
    path = Path(path)
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise InvalidInputError(f"Fichier introuvable: {path}", details={"path": str(path)}) from None
    except json.JSONDecodeError as e:
        raise InvalidInputError(
            f"JSON invalide dans {path}: {e.msg}",
            details={"path": str(path), "line": e.lineno}
        ) from e
    return environment_from_json(payload, species, default_name=path.stem)


def write_tensor_file(path: str | Path, tensor: DenseTensor, name: str | None = None) -> None:
    Path(path).write_text(
        TensorFile.from_tensor(tensor, name).model_dump_json(indent=2, exclude_none=True),
        encoding="utf-8",
    )
