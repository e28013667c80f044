"""
Générateurs aléatoires : tenseurs, permutations, arbres bien typés et redex
par règle, plus le balayage de correction utilisé par le selftest.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from app.core.config import settings
from app.core.logging import get_logger
from app.models.reports import RuleSweepResult
from app.services.rewrite import get_rule, normalize
from app.services.species import Color, TensorSpecies
from app.services.tensor import DenseTensor, Permutation, succ_above
from app.services.tree import (
    Action,
    Add,
    Contr,
    Eval,
    Neg,
    Perm,
    Prod,
    Smul,
    TensorNode,
    TensorTree,
    semantics,
    structurally_equal,
)

logger = get_logger(__name__)

Signature = tuple[Color, ...]

NODE_KINDS = ("leaf", "smul", "neg", "add", "action", "perm", "prod", "contr", "eval")


def random_tensor(rng: np.random.Generator, species: TensorSpecies, signature: Sequence[Color]) -> DenseTensor:
    return DenseTensor.random(species, signature, rng)


def random_signature(rng: np.random.Generator, species: TensorSpecies, rank: int) -> Signature:
    return tuple(str(species.colors[k]) for k in rng.integers(0, len(species.colors), size=rank))


def random_permutation(rng: np.random.Generator, target: Sequence[Color]) -> Permutation:
    """Permutation aléatoire de cible donnée ; la source s'en déduit."""
    mapping = tuple(int(p) for p in rng.permutation(len(target)))
    source = tuple(target[p] for p in mapping)
    return Permutation(source, tuple(target), mapping)


def random_scalar(rng: np.random.Generator) -> complex:
    return complex(rng.choice([-2.0, -1.0, 0.5, 2.0, 3.0])) * (1j if rng.random() < 0.3 else 1)


def random_leaf(rng: np.random.Generator, species: TensorSpecies, signature: Sequence[Color]) -> TensorNode:
    return TensorNode(random_tensor(rng, species, signature), name=f"T{int(rng.integers(0, 1000))}")


def contraction_child_signature(
    rng: np.random.Generator,
    species: TensorSpecies,
    signature: Sequence[Color],
) -> tuple[int, int, Signature]:
    """
    Tire (i, j) et une signature enfant dont contr i j donne signature.

    La couleur c est placée en i et τ c en succ_above(i, j).
    """
    n = len(signature)
    i = int(rng.integers(0, n + 2))
    j = int(rng.integers(0, n + 1))
    k = succ_above(i, j, n + 2)
    color = str(species.colors[int(rng.integers(0, len(species.colors)))])
    rest = iter(signature)
    child = tuple(
        color if p == i else species.dual(color) if p == k else next(rest)
        for p in range(n + 2)
    )
    return i, j, child


def random_tree(
    rng: np.random.Generator,
    species: TensorSpecies,
    signature: Sequence[Color],
    depth: int,
    max_rank: int = 4,
    allow: Sequence[str] = NODE_KINDS,
) -> TensorTree:
    """Arbre aléatoire bien typé de signature imposée, rangs intermédiaires ≤ max_rank."""
    signature = tuple(signature)
    n = len(signature)
    if depth <= 0:
        return random_leaf(rng, species, signature)
    kinds = list(allow)
    if n + 2 > max_rank:
        kinds = [k for k in kinds if k != "contr"]
    if n + 1 > max_rank:
        kinds = [k for k in kinds if k != "eval"]
    kind = kinds[int(rng.integers(0, len(kinds)))]
    sub = depth - 1

    def grow(sig: Sequence[Color]) -> TensorTree:
        return random_tree(rng, species, sig, sub, max_rank, allow)

    match kind:
        case "leaf":
            return random_leaf(rng, species, signature)
        case "smul":
            return Smul(random_scalar(rng), grow(signature))
        case "neg":
            return Neg(grow(signature))
        case "add":
            return Add(grow(signature), grow(signature))
        case "action":
            return Action(species.sample_group(rng), grow(signature), name="g")
        case "perm":
            sigma = random_permutation(rng, signature)
            return Perm(sigma, grow(sigma.source))
        case "prod":
            cut = int(rng.integers(0, n + 1))
            return Prod(grow(signature[:cut]), grow(signature[cut:]))
        case "contr":
            i, j, child = contraction_child_signature(rng, species, signature)
            return Contr(i, j, grow(child))
        case _:
            i = int(rng.integers(0, n + 1))
            color = str(species.colors[int(rng.integers(0, len(species.colors)))])
            child = signature[:i] + (color,) + signature[i:]
            x = int(rng.integers(0, species.rep_dim(color) + 1))
            return Eval(i, x, grow(child))


def _rank(rng: np.random.Generator, low: int, high: int) -> int:
    return int(rng.integers(low, high + 1))


# === Redex par règle ===

def _perm_of(rng, species, signature, depth) -> Perm:
    sigma = random_permutation(rng, signature)
    return Perm(sigma, random_tree(rng, species, sigma.source, depth))


def _gen_prod_perm_left(rng, species, depth):
    n = _rank(rng, 1, 3)
    left = _perm_of(rng, species, random_signature(rng, species, n), depth)
    right = random_tree(rng, species, random_signature(rng, species, _rank(rng, 0, 4 - n)), depth)
    return Prod(left, right)


def _gen_prod_perm_right(rng, species, depth):
    m = _rank(rng, 1, 3)
    left = random_tree(rng, species, random_signature(rng, species, _rank(rng, 0, 4 - m)), depth)
    return Prod(left, _perm_of(rng, species, random_signature(rng, species, m), depth))


def _gen_perm_perm(rng, species, depth):
    sig = random_signature(rng, species, _rank(rng, 0, 4))
    outer = random_permutation(rng, sig)
    return Perm(outer, _perm_of(rng, species, outer.source, depth))


def _gen_perm_id(rng, species, depth):
    sig = random_signature(rng, species, _rank(rng, 0, 4))
    return Perm(Permutation.identity(sig), random_tree(rng, species, sig, depth))


def _gen_perm_contr_congr(rng, species, depth):
    sig = random_signature(rng, species, _rank(rng, 0, 2))
    i, j, child = contraction_child_signature(rng, species, sig)
    return Contr(i, j, _perm_of(rng, species, child, depth))


def _gen_contr_contr(rng, species, depth):
    sig = random_signature(rng, species, 0)
    i, j, middle = contraction_child_signature(rng, species, sig)
    k, l, base = contraction_child_signature(rng, species, middle)
    return Contr(i, j, Contr(k, l, random_tree(rng, species, base, depth, allow=("leaf", "prod", "neg", "perm"))))


def _wrapped(wrapper: type, rng, species, sig, depth) -> TensorTree:
    if wrapper is Perm:
        return _perm_of(rng, species, sig, depth)
    child = random_tree(rng, species, sig, depth)
    if wrapper is Neg:
        return Neg(child)
    if wrapper is Smul:
        return Smul(random_scalar(rng), child)
    if wrapper is Action:
        return Action(species.sample_group(rng), child, name="g")
    return Add(child, random_tree(rng, species, sig, depth))


def _gen_prod_with(inner: type, side: str):
    def gen(rng, species, depth):
        n = _rank(rng, 0, 4)
        cut = _rank(rng, 0, n)
        sig = random_signature(rng, species, n)
        left_sig, right_sig = sig[:cut], sig[cut:]
        if side == "left":
            return Prod(_wrapped(inner, rng, species, left_sig, depth), random_tree(rng, species, right_sig, depth))
        return Prod(random_tree(rng, species, left_sig, depth), _wrapped(inner, rng, species, right_sig, depth))
    return gen


def _gen_contr_with(inner: type):
    def gen(rng, species, depth):
        sig = random_signature(rng, species, _rank(rng, 0, 2))
        i, j, child = contraction_child_signature(rng, species, sig)
        return Contr(i, j, _wrapped(inner, rng, species, child, depth))
    return gen


def _gen_eval_with(inner: type):
    def gen(rng, species, depth):
        n = _rank(rng, 1, 4)
        sig = random_signature(rng, species, n)
        i = _rank(rng, 0, n - 1)
        x = _rank(rng, 0, species.rep_dim(sig[i]))
        return Eval(i, x, _wrapped(inner, rng, species, sig, depth))
    return gen


def _gen_unary_with(outer: type, inner: type):
    def gen(rng, species, depth):
        sig = random_signature(rng, species, _rank(rng, 0, 4))
        child = _wrapped(inner, rng, species, sig, depth)
        if outer is Neg:
            return Neg(child)
        if outer is Smul:
            return Smul(random_scalar(rng), child)
        if outer is Action:
            return Action(species.sample_group(rng), child, name="g")
        sigma = random_permutation(rng, sig)
        return Perm(sigma, _wrapped(inner, rng, species, sigma.source, depth))
    return gen


def _gen_add_perm(rng, species, depth):
    sig = random_signature(rng, species, _rank(rng, 0, 4))
    sigma = random_permutation(rng, sig)
    return Add(
        Perm(sigma, random_tree(rng, species, sigma.source, depth)),
        Perm(sigma, random_tree(rng, species, sigma.source, depth)),
    )


REDEX_GENERATORS: dict[str, Callable[[np.random.Generator, TensorSpecies, int], TensorTree]] = {
    "prod_perm_left": _gen_prod_perm_left,
    "prod_perm_right": _gen_prod_perm_right,
    "perm_perm": _gen_perm_perm,
    "perm_id": _gen_perm_id,
    "perm_contr_congr": _gen_perm_contr_congr,
    "contr_contr": _gen_contr_contr,
    "neg_fst_prod": _gen_prod_with(Neg, "left"),
    "neg_snd_prod": _gen_prod_with(Neg, "right"),
    "neg_contr": _gen_contr_with(Neg),
    "neg_perm": _gen_unary_with(Neg, Perm),
    "neg_neg": _gen_unary_with(Neg, Neg),
    "smul_fst_prod": _gen_prod_with(Smul, "left"),
    "smul_snd_prod": _gen_prod_with(Smul, "right"),
    "smul_contr": _gen_contr_with(Smul),
    "smul_perm": _gen_unary_with(Smul, Perm),
    "smul_neg": _gen_unary_with(Smul, Neg),
    "smul_smul": _gen_unary_with(Smul, Smul),
    "eval_perm": _gen_eval_with(Perm),
    "neg_eval": _gen_eval_with(Neg),
    "smul_eval": _gen_eval_with(Smul),
    "action_perm": _gen_unary_with(Action, Perm),
    "action_neg": _gen_unary_with(Action, Neg),
    "action_smul": _gen_unary_with(Action, Smul),
    "perm_add": _gen_unary_with(Perm, Add),
    "neg_add": _gen_unary_with(Neg, Add),
    "smul_add": _gen_unary_with(Smul, Add),
    "prod_add_left": _gen_prod_with(Add, "left"),
    "prod_add_right": _gen_prod_with(Add, "right"),
    "contr_add": _gen_contr_with(Add),
    "eval_add": _gen_eval_with(Add),
    "action_add": _gen_unary_with(Action, Add),
    "add_perm": _gen_add_perm,
}


def random_redex(rng: np.random.Generator, species: TensorSpecies, rule_name: str, depth: int = 1) -> TensorTree:
    """Arbre aléatoire dont la racine correspond à la règle."""
    return REDEX_GENERATORS[rule_name](rng, species, depth)


def deviation(a: DenseTensor, b: DenseTensor) -> float:
    """Écart absolu maximal entre deux tenseurs."""
    if a.data.size == 0:
        return 0.0
    return float(np.max(np.abs(a.data - b.data)))


def soundness_sweep(
    rule_name: str,
    species: TensorSpecies,
    cases: int,
    tol: float | None = None,
    seed: int | None = None,
    depth: int = 1,
) -> RuleSweepResult:
    """
    Applique la règle à des redex aléatoires et mesure l'écart absolu maximal
    entre la sémantique du redex et celle de sa réécriture puis de sa forme normale.
    """
    tol = settings.invariance_tol if tol is None else tol
    rng = np.random.default_rng(seed)
    rule = get_rule(rule_name)
    worst, normalize_worst, idempotent = 0.0, 0.0, True
    for _ in range(cases):
        tree = random_redex(rng, species, rule_name, depth)
        value = semantics(tree)
        worst = max(worst, deviation(value, semantics(rule.apply(tree))))
        normal = normalize(tree)
        normalize_worst = max(normalize_worst, deviation(value, semantics(normal)))
        idempotent = idempotent and structurally_equal(normalize(normal), normal)
    result = RuleSweepResult(
        rule=rule_name,
        species=species.name,
        cases=cases,
        max_deviation=worst,
        passed=worst <= tol and normalize_worst <= tol,
        normalize_deviation=normalize_worst,
        normalize_idempotent=idempotent,
    )
    logger.debug("balayage_regle", rule=rule_name, species=species.name, max_deviation=worst)
    return result
