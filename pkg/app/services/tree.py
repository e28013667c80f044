"""
Arbres de tenseurs : représentation intermédiaire à neuf constructeurs.

Chaque noeud calcule et mémorise sa signature à la construction ; un arbre mal
typé ne peut pas être construit. La sémantique réduit l'arbre à un DenseTensor.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from app.utils.compat import StrEnum
from typing import Iterator, Mapping, Sequence, Union

import numpy as np

from app.core.error_handler import (
    DualityError,
    IndexOutOfRangeError,
    InvalidInputError,
    SignatureMismatchError,
    SpeciesMismatchError,
)
from app.services.species import GroupElement, TensorSpecies
from app.services.tensor import (
    DenseTensor,
    Permutation,
    Signature,
    add_tensors,
    contract,
    eval_index,
    group_act,
    negate,
    permute,
    scale,
    succ_above,
    tensor_product,
)
from app.utils.validators import format_scalar


class Step(StrEnum):
    """Sélecteur d'enfant dans un chemin."""

    LEFT = "left"
    RIGHT = "right"
    ONLY = "only"

    @classmethod
    def _missing_(cls, value):
        if isinstance(value, str) and value.lower() in ("child", "c", "0"):
            return cls.ONLY
        if isinstance(value, str) and value.lower() in ("l", "fst"):
            return cls.LEFT
        if isinstance(value, str) and value.lower() in ("r", "snd"):
            return cls.RIGHT
        return None


Path = tuple[Step, ...]


def parse_path(steps: Sequence[str | Step]) -> Path:
    try:
        return tuple(Step(s) for s in steps)
    except ValueError as e:
        raise InvalidInputError(f"Chemin invalide: {list(steps)}", details={"path": [str(s) for s in steps]}) from e


def _same_species(left: TensorTree, right: TensorTree) -> TensorSpecies:
    if left.species is not right.species:
        raise SpeciesMismatchError(
            "Sous-arbres d'espèces différentes",
            details={"left": left.species.name, "right": right.species.name}
        )
    return left.species


@dataclass(frozen=True, eq=False)
class TensorNode:
    """Feuille : un tenseur concret, éventuellement nommé ou variable."""

    tensor: DenseTensor
    name: str | None = None
    variable: bool = False
    signature: Signature = field(init=False)
    species: TensorSpecies = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "signature", self.tensor.signature)
        object.__setattr__(self, "species", self.tensor.species)


@dataclass(frozen=True, eq=False)
class Smul:
    scalar: complex
    child: TensorTree
    signature: Signature = field(init=False)
    species: TensorSpecies = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "scalar", complex(self.scalar))
        object.__setattr__(self, "signature", self.child.signature)
        object.__setattr__(self, "species", self.child.species)


@dataclass(frozen=True, eq=False)
class Neg:
    child: TensorTree
    signature: Signature = field(init=False)
    species: TensorSpecies = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "signature", self.child.signature)
        object.__setattr__(self, "species", self.child.species)


@dataclass(frozen=True, eq=False)
class Add:
    left: TensorTree
    right: TensorTree
    signature: Signature = field(init=False)
    species: TensorSpecies = field(init=False)

    def __post_init__(self) -> None:
        species = _same_species(self.left, self.right)
        if self.left.signature != self.right.signature:
            raise SignatureMismatchError(
                "Addition de sous-arbres de signatures différentes",
                details={"left": list(self.left.signature), "right": list(self.right.signature)}
            )
        object.__setattr__(self, "signature", self.left.signature)
        object.__setattr__(self, "species", species)


@dataclass(frozen=True, eq=False)
class Action:
    """Action d'un élément du groupe sur le sous-arbre."""

    element: GroupElement
    child: TensorTree
    name: str | None = None
    signature: Signature = field(init=False)
    species: TensorSpecies = field(init=False)

    def __post_init__(self) -> None:
        if self.element.size != self.child.species.group_size:
            raise InvalidInputError(
                "Élément de groupe de taille incompatible avec l'espèce",
                details={"size": self.element.size, "species": self.child.species.name}
            )
        object.__setattr__(self, "signature", self.child.signature)
        object.__setattr__(self, "species", self.child.species)


@dataclass(frozen=True, eq=False)
class Perm:
    perm: Permutation
    child: TensorTree
    signature: Signature = field(init=False)
    species: TensorSpecies = field(init=False)

    def __post_init__(self) -> None:
        if self.perm.source != self.child.signature:
            raise SignatureMismatchError(
                "La source de la permutation ne correspond pas au sous-arbre",
                details={"source": list(self.perm.source), "child": list(self.child.signature)}
            )
        object.__setattr__(self, "signature", self.perm.target)
        object.__setattr__(self, "species", self.child.species)


@dataclass(frozen=True, eq=False)
class Prod:
    left: TensorTree
    right: TensorTree
    signature: Signature = field(init=False)
    species: TensorSpecies = field(init=False)

    def __post_init__(self) -> None:
        species = _same_species(self.left, self.right)
        object.__setattr__(self, "signature", self.left.signature + self.right.signature)
        object.__setattr__(self, "species", species)


@dataclass(frozen=True, eq=False)
class Contr:
    """Contraction des positions i et succ_above(i, j) du sous-arbre."""

    i: int
    j: int
    child: TensorTree
    signature: Signature = field(init=False)
    species: TensorSpecies = field(init=False)

    def __post_init__(self) -> None:
        sig = self.child.signature
        n = len(sig)
        if n < 2 or not 0 <= self.i < n or not 0 <= self.j < n - 1:
            raise IndexOutOfRangeError(
                f"contr {self.i} {self.j} invalide sur un sous-arbre de rang {n}",
                details={"i": self.i, "j": self.j, "rank": n}
            )
        k = succ_above(self.i, self.j, n)
        if self.child.species.dual(sig[self.i]) != sig[k]:
            raise DualityError(
                f"contr {self.i} {self.j}: couleurs {sig[self.i]} et {sig[k]} non duales",
                details={"i": self.i, "j": self.j, "colors": [sig[self.i], sig[k]]}
            )
        object.__setattr__(self, "signature", tuple(c for p, c in enumerate(sig) if p not in (self.i, k)))
        object.__setattr__(self, "species", self.child.species)

    @property
    def second(self) -> int:
        """Position effective de la seconde jambe dans le sous-arbre."""
        return succ_above(self.i, self.j)


@dataclass(frozen=True, eq=False)
class Eval:
    """Évaluation de la position i sur le vecteur de base x."""

    i: int
    x: int
    child: TensorTree
    signature: Signature = field(init=False)
    species: TensorSpecies = field(init=False)

    def __post_init__(self) -> None:
        sig = self.child.signature
        if not 0 <= self.i < len(sig) or self.x < 0:
            raise IndexOutOfRangeError(
                f"eval {self.i} {self.x} invalide sur un sous-arbre de rang {len(sig)}",
                details={"i": self.i, "x": self.x, "rank": len(sig)}
            )
        object.__setattr__(self, "signature", sig[:self.i] + sig[self.i + 1:])
        object.__setattr__(self, "species", self.child.species)


TensorTree = Union[TensorNode, Smul, Neg, Add, Action, Perm, Prod, Contr, Eval]

UNARY_NODES = (Smul, Neg, Action, Perm, Contr, Eval)
BINARY_NODES = (Add, Prod)


def leaf(tensor: DenseTensor, name: str | None = None, variable: bool = False) -> TensorNode:
    return TensorNode(tensor, name, variable)


def signature_of(node: TensorTree) -> Signature:
    """Signature mémorisée du noeud."""
    return node.signature


def children(node: TensorTree) -> list[tuple[Step, TensorTree]]:
    if isinstance(node, BINARY_NODES):
        return [(Step.LEFT, node.left), (Step.RIGHT, node.right)]
    if isinstance(node, UNARY_NODES):
        return [(Step.ONLY, node.child)]
    return []


def node_kind(node: TensorTree) -> str:
    return {
        TensorNode: "tensor",
        Smul: "smul",
        Neg: "neg",
        Add: "add",
        Action: "action",
        Perm: "perm",
        Prod: "prod",
        Contr: "contr",
        Eval: "eval",
    }[type(node)]


def node_shape(node: TensorTree) -> str:
    """Forme du noeud et de ses enfants directs, ex. contr(neg)."""
    kids = [node_kind(child) for _, child in children(node)]
    return f"{node_kind(node)}({', '.join(kids)})" if kids else node_kind(node)


def semantics(node: TensorTree) -> DenseTensor:
    """Le tenseur sous-jacent à l'arbre, par récursion structurelle."""
    match node:
        case TensorNode(tensor=t):
            return t
        case Smul(scalar=a, child=c):
            return scale(a, semantics(c))
        case Neg(child=c):
            return negate(semantics(c))
        case Add(left=l, right=r):
            return add_tensors(semantics(l), semantics(r))
        case Action(element=g, child=c):
            return group_act(node.species, g, semantics(c))
        case Perm(perm=p, child=c):
            return permute(semantics(c), p)
        case Prod(left=l, right=r):
            return tensor_product(semantics(l), semantics(r))
        case Contr(i=i, j=j, child=c):
            return contract(semantics(c), i, j)
        case Eval(i=i, x=x, child=c):
            return eval_index(semantics(c), i, x)
    raise InvalidInputError(f"Noeud inconnu: {type(node).__name__}")


def with_children(node: TensorTree, new_children: Sequence[TensorTree]) -> TensorTree:
    """Copie du noeud avec de nouveaux enfants (typage revérifié)."""
    if isinstance(node, BINARY_NODES):
        left, right = new_children
        return dataclasses.replace(node, left=left, right=right)
    if isinstance(node, UNARY_NODES):
        (child,) = new_children
        return dataclasses.replace(node, child=child)
    return node


def subtree_at(tree: TensorTree, path: Sequence[Step | str]) -> TensorTree:
    node = tree
    for raw in parse_path(path):
        for step, child in children(node):
            if step == raw:
                node = child
                break
        else:
            raise InvalidInputError(
                f"Le chemin ne désigne aucun noeud (étape '{raw}' sur {node_kind(node)})",
                details={"path": [str(s) for s in path]}
            )
    return node


def replace_at(tree: TensorTree, path: Sequence[Step | str], replacement: TensorTree) -> TensorTree:
    """
    Remplace le sous-arbre désigné par path.

    Raises:
        SignatureMismatchError: si les signatures diffèrent.
    """
    steps = parse_path(path)
    target = subtree_at(tree, steps)
    if target.signature != replacement.signature:
        raise SignatureMismatchError(
            "Le remplacement n'a pas la signature du sous-arbre visé",
            details={"expected": list(target.signature), "given": list(replacement.signature)}
        )
    return _replace(tree, steps, replacement)


def _replace(node: TensorTree, steps: Path, replacement: TensorTree) -> TensorTree:
    if not steps:
        return replacement
    head, rest = steps[0], steps[1:]
    new_children = [
        _replace(child, rest, replacement) if step == head else child
        for step, child in children(node)
    ]
    return with_children(node, new_children)


def iter_nodes(tree: TensorTree, path: Path = ()) -> Iterator[tuple[Path, TensorTree]]:
    """Parcours postfixe (enfants avant parent) avec chemins."""
    for step, child in children(tree):
        yield from iter_nodes(child, path + (step,))
    yield path, tree


def leaves(tree: TensorTree) -> list[TensorNode]:
    return [node for _, node in iter_nodes(tree) if isinstance(node, TensorNode)]


def variables(tree: TensorTree) -> dict[str, Signature]:
    """Noms des feuilles variables et leurs signatures."""
    return {
        node.name: node.signature
        for node in leaves(tree)
        if node.variable and node.name is not None
    }


def instantiate(tree: TensorTree, values: Mapping[str, DenseTensor]) -> TensorTree:
    """Remplace chaque feuille variable par la valeur de même nom."""
    if isinstance(tree, TensorNode):
        if tree.variable and tree.name in values:
            value = values[tree.name]
            if value.signature != tree.signature:
                raise SignatureMismatchError(
                    f"Instanciation de '{tree.name}' avec une mauvaise signature",
                    details={"expected": list(tree.signature), "given": list(value.signature)}
                )
            return TensorNode(value, tree.name, variable=False)
        return tree
    return with_children(tree, [instantiate(child, values) for _, child in children(tree)])


def dump(tree: TensorTree) -> str:
    """Dump canonique en s-expression, stable pour les tests de référence."""
    match tree:
        case TensorNode(name=name):
            return f'(tensor "{name}")' if name is not None else "(tensor _)"
        case Smul(scalar=a, child=c):
            return f"(smul {format_scalar(a)} {dump(c)})"
        case Neg(child=c):
            return f"(neg {dump(c)})"
        case Add(left=l, right=r):
            return f"(add {dump(l)} {dump(r)})"
        case Action(name=name, child=c):
            return f"(action {name if name is not None else '_'} {dump(c)})"
        case Perm(perm=p, child=c):
            return f"(perm [{' '.join(str(x) for x in p.mapping)}] {dump(c)})"
        case Prod(left=l, right=r):
            return f"(prod {dump(l)} {dump(r)})"
        case Contr(i=i, j=j, child=c):
            return f"(contr {i} {j} {dump(c)})"
        case Eval(i=i, x=x, child=c):
            return f"(eval {i} {x} {dump(c)})"
    raise InvalidInputError(f"Noeud inconnu: {type(tree).__name__}")


def structurally_equal(a: TensorTree, b: TensorTree, tol: float = 0.0) -> bool:
    """
    Égalité syntaxique de deux arbres.

    Feuilles égales si même nom et mêmes composantes ; scalaires comparés à tol près.
    """
    if type(a) is not type(b) or a.signature != b.signature:
        return False
    match a:
        case TensorNode():
            return (
                a.name == b.name
                and a.variable == b.variable
                and a.tensor.species is b.tensor.species
                and np.array_equal(a.tensor.data, b.tensor.data)
            )
        case Smul():
            if abs(a.scalar - b.scalar) > tol:
                return False
        case Action():
            if not np.array_equal(a.element.matrix, b.element.matrix):
                return False
        case Perm():
            if a.perm != b.perm:
                return False
        case Contr():
            if (a.i, a.j) != (b.i, b.j):
                return False
        case Eval():
            if (a.i, a.x) != (b.i, b.x):
                return False
    return all(
        structurally_equal(ca, cb, tol)
        for (_, ca), (_, cb) in zip(children(a), children(b))
    )
