"""
Tenseurs denses et noyaux multilinéaires.

Un DenseTensor est une signature de couleurs et un tableau plat de composantes
complexes en ordre row-major (dernier indice le plus rapide). Les isomorphismes
de cohérence (associateur, unitors, tressage) se réduisent à de l'arithmétique
d'indices sur cette disposition.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from app.core.error_handler import (
    DualityError,
    IndexOutOfRangeError,
    InvalidInputError,
    SignatureMismatchError,
    SpeciesMismatchError,
)
from app.services.species import Color, GroupElement, TensorSpecies

Signature = tuple[Color, ...]


def succ_above(i: int, j: int, size: int | None = None) -> int:
    """
    Injection croissante qui saute la position i.

    Args:
        i: Position du trou, dans [0, size).
        j: Position à envoyer, dans [0, size - 1).
        size: Taille de l'image (optionnelle, pour la vérification des bornes).

    Returns:
        j si j < i, sinon j + 1.
    """
    if i < 0 or j < 0 or (size is not None and (i >= size or j >= size - 1)):
        raise IndexOutOfRangeError(
            f"succ_above hors bornes: i={i}, j={j}, taille={size}",
            details={"i": i, "j": j, "size": size}
        )
    return j if j < i else j + 1


def pred_above(i: int, k: int) -> int:
    """Inverse de succ_above(i, ·) sur k ≠ i."""
    if k == i:
        raise IndexOutOfRangeError(
            f"pred_above indéfini au trou: i={i}, k={k}",
            details={"i": i, "k": k}
        )
    return k if k < i else k - 1


@dataclass(frozen=True)
class Permutation:
    """
    Bijection de positions compatible avec les couleurs.

    mapping[i] est la position cible de la position source i, avec
    source[i] == target[mapping[i]].
    """

    source: Signature
    target: Signature
    mapping: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "source", tuple(self.source))
        object.__setattr__(self, "target", tuple(self.target))
        object.__setattr__(self, "mapping", tuple(int(p) for p in self.mapping))
        n = len(self.source)
        if len(self.target) != n or len(self.mapping) != n:
            raise SignatureMismatchError(
                "Permutation de longueurs incohérentes",
                details={"source": list(self.source), "target": list(self.target), "map": list(self.mapping)}
            )
        if sorted(self.mapping) != list(range(n)):
            raise InvalidInputError(
                "La permutation n'est pas une bijection",
                details={"map": list(self.mapping)}
            )
        for i, p in enumerate(self.mapping):
            if self.source[i] != self.target[p]:
                raise SignatureMismatchError(
                    f"Permutation incompatible avec les couleurs en position {i}",
                    details={"source": list(self.source), "target": list(self.target), "map": list(self.mapping)}
                )

    @classmethod
    def identity(cls, signature: Sequence[Color]) -> Permutation:
        sig = tuple(signature)
        return cls(sig, sig, tuple(range(len(sig))))

    @classmethod
    def from_mapping(cls, source: Sequence[Color], mapping: Sequence[int]) -> Permutation:
        """Construit la permutation et déduit la signature cible."""
        target: list[Color | None] = [None] * len(source)
        for i, p in enumerate(mapping):
            if not 0 <= p < len(source):
                raise InvalidInputError("Position de permutation hors bornes", details={"map": list(mapping)})
            target[p] = source[i]
        if any(c is None for c in target):
            raise InvalidInputError("La permutation n'est pas une bijection", details={"map": list(mapping)})
        return cls(tuple(source), tuple(target), tuple(mapping))

    def __len__(self) -> int:
        return len(self.mapping)

    def compose(self, inner: Permutation) -> Permutation:
        """self ∘ inner : applique inner puis self."""
        if inner.target != self.source:
            raise SignatureMismatchError(
                "Composition de permutations incompatibles",
                details={"inner_target": list(inner.target), "outer_source": list(self.source)}
            )
        return Permutation(
            inner.source,
            self.target,
            tuple(self.mapping[p] for p in inner.mapping)
        )

    def inverse(self) -> Permutation:
        inv = [0] * len(self.mapping)
        for i, p in enumerate(self.mapping):
            inv[p] = i
        return Permutation(self.target, self.source, tuple(inv))

    @property
    def is_identity(self) -> bool:
        return all(i == p for i, p in enumerate(self.mapping))


@dataclass(frozen=True, eq=False)
class DenseTensor:
    """Tenseur concret : espèce, signature et composantes row-major."""

    species: TensorSpecies
    signature: Signature
    data: np.ndarray

    def __post_init__(self) -> None:
        sig = tuple(str(c) for c in self.signature)
        for c in sig:
            self.species.check_color(c)
        data = np.array(self.data, dtype=np.complex128).reshape(-1)
        expected = int(np.prod([self.species.rep_dim(c) for c in sig], dtype=np.int64))
        if data.size != expected:
            raise InvalidInputError(
                f"Nombre de composantes {data.size} ≠ {expected} attendu pour {list(sig)}",
                details={"signature": list(sig), "expected": expected, "given": int(data.size)}
            )
        data.setflags(write=False)
        object.__setattr__(self, "signature", sig)
        object.__setattr__(self, "data", data)

    @property
    def rank(self) -> int:
        return len(self.signature)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(self.species.rep_dim(c) for c in self.signature)

    @property
    def array(self) -> np.ndarray:
        """Vue multidimensionnelle (lecture seule) des composantes."""
        return self.data.reshape(self.shape)

    def __getitem__(self, index: Sequence[int]) -> complex:
        return complex(self.array[tuple(index)])

    @classmethod
    def from_array(cls, species: TensorSpecies, signature: Sequence[Color], array) -> DenseTensor:
        return cls(species, tuple(signature), np.asarray(array, dtype=np.complex128).reshape(-1))

    @classmethod
    def zeros(cls, species: TensorSpecies, signature: Sequence[Color]) -> DenseTensor:
        size = int(np.prod([species.rep_dim(c) for c in signature], dtype=np.int64))
        return cls(species, tuple(signature), np.zeros(size, dtype=np.complex128))

    @classmethod
    def scalar(cls, species: TensorSpecies, value: complex) -> DenseTensor:
        return cls(species, (), np.array([value], dtype=np.complex128))

    @classmethod
    def random(cls, species: TensorSpecies, signature: Sequence[Color], rng: np.random.Generator) -> DenseTensor:
        """Composantes gaussiennes complexes indépendantes."""
        size = int(np.prod([species.rep_dim(c) for c in signature], dtype=np.int64))
        data = rng.standard_normal(size) + 1j * rng.standard_normal(size)
        return cls(species, tuple(signature), data)

    def max_abs_diff(self, other: DenseTensor) -> float:
        _check_same_signature(self, other)
        if self.data.size == 0:
            return 0.0
        return float(np.max(np.abs(self.data - other.data)))

    def allclose(self, other: DenseTensor, tol: float) -> bool:
        return self.signature == other.signature and self.max_abs_diff(other) <= tol

    def __repr__(self) -> str:
        return f"DenseTensor({self.species.name}, {list(self.signature)})"


def _check_same_species(a: DenseTensor, b: DenseTensor) -> None:
    if a.species is not b.species:
        raise SpeciesMismatchError(
            "Tenseurs d'espèces différentes",
            details={"left": a.species.name, "right": b.species.name}
        )


def _check_same_signature(a: DenseTensor, b: DenseTensor) -> None:
    _check_same_species(a, b)
    if a.signature != b.signature:
        raise SignatureMismatchError(
            "Signatures différentes",
            details={"left": list(a.signature), "right": list(b.signature)}
        )


def tensor_product(a: DenseTensor, b: DenseTensor) -> DenseTensor:
    """Produit tensoriel : signature a ++ b, composante (m, m') = a[m]·b[m']."""
    _check_same_species(a, b)
    product = np.multiply.outer(a.array, b.array)
    return DenseTensor(a.species, a.signature + b.signature, product.reshape(-1))


def contract(t: DenseTensor, i: int, j: int) -> DenseTensor:
    """
    Contracte la position i avec la position succ_above(i, j).

    Args:
        t: Tenseur de rang ≥ 2.
        i: Première position, dans [0, rang).
        j: Seconde position vue depuis le trou en i, dans [0, rang - 1).

    Returns:
        Tenseur sans les deux positions, ordre des autres conservé.

    Raises:
        DualityError: si les deux couleurs ne sont pas duales.
    """
    n = t.rank
    if n < 2:
        raise IndexOutOfRangeError(f"Contraction d'un tenseur de rang {n}", details={"rank": n})
    k = succ_above(i, j, n)
    ci, ck = t.signature[i], t.signature[k]
    if t.species.dual(ci) != ck:
        raise DualityError(
            f"Les couleurs {ci} (position {i}) et {ck} (position {k}) ne sont pas duales",
            details={"i": i, "j": j, "colors": [ci, ck]}
        )
    form = t.species.contr_form(ci)
    moved = np.moveaxis(t.array, [i, k], [0, 1])
    result = np.tensordot(form, moved, axes=([0, 1], [0, 1]))
    signature = tuple(c for p, c in enumerate(t.signature) if p not in (i, k))
    return DenseTensor(t.species, signature, result.reshape(-1))


def permute(t: DenseTensor, sigma: Permutation) -> DenseTensor:
    """result[b] = t[a] avec a[i] = b[mapping[i]]."""
    if sigma.source != t.signature:
        raise SignatureMismatchError(
            "La source de la permutation ne correspond pas au tenseur",
            details={"source": list(sigma.source), "signature": list(t.signature)}
        )
    axes = sigma.inverse().mapping
    result = np.transpose(t.array, axes) if t.rank else t.array
    return DenseTensor(t.species, sigma.target, np.ascontiguousarray(result).reshape(-1))


def eval_index(t: DenseTensor, i: int, x: int) -> DenseTensor:
    """Fixe la position i à la valeur de base x (0 si x dépasse la dimension)."""
    if t.rank < 1 or not 0 <= i < t.rank:
        raise IndexOutOfRangeError(
            f"Évaluation en position {i} d'un tenseur de rang {t.rank}",
            details={"i": i, "rank": t.rank}
        )
    if x < 0:
        raise IndexOutOfRangeError(f"Valeur de base négative: {x}", details={"x": x})
    dim = t.species.rep_dim(t.signature[i])
    index = x if x < dim else 0
    result = np.take(t.array, index, axis=i)
    signature = t.signature[:i] + t.signature[i + 1:]
    return DenseTensor(t.species, signature, np.ascontiguousarray(result).reshape(-1))


def group_act(species: TensorSpecies, g: GroupElement, t: DenseTensor) -> DenseTensor:
    """result[b] = Σ_a Π_i R(signature[i], g)[b_i][a_i] · t[a]."""
    if t.species is not species:
        raise SpeciesMismatchError(
            "Action d'une espèce sur un tenseur d'une autre espèce",
            details={"species": species.name, "tensor": t.species.name}
        )
    arr = t.array
    for axis, color in enumerate(t.signature):
        rep = species.rep_matrix(color, g)
        arr = np.moveaxis(np.tensordot(rep, arr, axes=([1], [axis])), 0, axis)
    return DenseTensor(species, t.signature, np.ascontiguousarray(arr).reshape(-1))


def add_tensors(a: DenseTensor, b: DenseTensor) -> DenseTensor:
    _check_same_signature(a, b)
    return DenseTensor(a.species, a.signature, a.data + b.data)


def scale(alpha: complex, t: DenseTensor) -> DenseTensor:
    return DenseTensor(t.species, t.signature, complex(alpha) * t.data)


def negate(t: DenseTensor) -> DenseTensor:
    return scale(-1, t)
