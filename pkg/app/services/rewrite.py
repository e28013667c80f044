"""
Moteur de réécriture des arbres de tenseurs.

- Catalogue de règles préservant la sémantique (permutations, négations,
  scalaires, contractions, distribution des sommes)
- Application dirigée par un chemin
- Normalisation déterministe, de l'intérieur vers l'extérieur, priorité fixe
- Comparaison de deux arbres (forme normale puis repli numérique)
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from app.core.config import settings
from app.core.error_handler import NoMatchError, NormalizationError, UnknownConstantError
from app.core.logging import get_logger
from app.models.reports import EqualityVerdict, RewriteStep
from app.services.tensor import DenseTensor, Permutation, pred_above, succ_above
from app.services.tree import (
    Action,
    Add,
    Contr,
    Eval,
    Neg,
    Perm,
    Prod,
    Smul,
    Step,
    TensorTree,
    children,
    dump,
    instantiate,
    iter_nodes,
    node_shape,
    parse_path,
    replace_at,
    semantics,
    structurally_equal,
    subtree_at,
    variables,
)

logger = get_logger(__name__)


@dataclass(frozen=True)
class RewriteRule:
    """
    Règle de réécriture.

    Attributes:
        name: Nom de la règle.
        matcher: Prédicat sur la forme du noeud.
        builder: Construit le sous-arbre réécrit (avec la permutation induite le cas échéant).
        manual_only: Règle jamais utilisée par normalize.
    """

    name: str
    matcher: Callable[[TensorTree], bool]
    builder: Callable[[TensorTree], TensorTree]
    manual_only: bool = False

    def matches(self, node: TensorTree) -> bool:
        return self.matcher(node)

    def apply(self, node: TensorTree) -> TensorTree:
        if not self.matcher(node):
            raise NoMatchError(self.name, node_shape(node))
        return self.builder(node)


# === Gabarits de correspondance ===

def _shape(outer: type, inner: type | None = None, side: str = "child") -> Callable[[TensorTree], bool]:
    def matcher(node: TensorTree) -> bool:
        if not isinstance(node, outer):
            return False
        if inner is None:
            return True
        return isinstance(getattr(node, side), inner)
    return matcher


def _survivors(size: int, removed: Sequence[int]) -> list[int]:
    return [r for r in range(size) if r not in removed]


# === Permutations ===

def _prod_perm_left(node: Prod) -> TensorTree:
    p = node.left
    n, m = len(p.child.signature), len(node.right.signature)
    inner = Prod(p.child, node.right)
    mapping = p.perm.mapping + tuple(n + k for k in range(m))
    return Perm(Permutation(inner.signature, node.signature, mapping), inner)


def _prod_perm_right(node: Prod) -> TensorTree:
    p = node.right
    n = len(node.left.signature)
    inner = Prod(node.left, p.child)
    mapping = tuple(range(n)) + tuple(n + x for x in p.perm.mapping)
    return Perm(Permutation(inner.signature, node.signature, mapping), inner)


def _perm_perm(node: Perm) -> TensorTree:
    return Perm(node.perm.compose(node.child.perm), node.child.child)


def _perm_id(node: Perm) -> TensorTree:
    return node.child


def _is_identity_perm(node: TensorTree) -> bool:
    return isinstance(node, Perm) and node.perm.is_identity


def _perm_contr_congr(node: Contr) -> TensorTree:
    sigma = node.child.perm
    base = node.child.child
    size = len(base.signature)
    p, q = node.i, succ_above(node.i, node.j)
    inverse = sigma.inverse().mapping
    a, b = inverse[p], inverse[q]
    inner = Contr(a, pred_above(a, b), base)
    kept_inner = _survivors(size, (a, b))
    kept_outer = _survivors(size, (p, q))
    mapping = tuple(kept_outer.index(sigma.mapping[r]) for r in kept_inner)
    return Perm(Permutation(inner.signature, node.signature, mapping), inner)


def _eval_perm(node: Eval) -> TensorTree:
    sigma = node.child.perm
    base = node.child.child
    size = len(base.signature)
    a = sigma.inverse().mapping[node.i]
    inner = Eval(a, node.x, base)
    kept_inner = _survivors(size, (a,))
    kept_outer = _survivors(size, (node.i,))
    mapping = tuple(kept_outer.index(sigma.mapping[r]) for r in kept_inner)
    return Perm(Permutation(inner.signature, node.signature, mapping), inner)


def _action_perm(node: Action) -> TensorTree:
    return Perm(node.child.perm, Action(node.element, node.child.child, node.name))


def _neg_perm(node: Neg) -> TensorTree:
    return Perm(node.child.perm, Neg(node.child.child))


def _smul_perm(node: Smul) -> TensorTree:
    return Perm(node.child.perm, Smul(node.scalar, node.child.child))


# === Contractions ===

def contraction_pairs(node: Contr) -> tuple[tuple[int, int], tuple[int, int]]:
    """
    Paires de positions des deux contractions de contr(contr(t)), en coordonnées de t.

    Returns:
        (paire externe, paire interne).
    """
    inner = node.child
    size = len(inner.child.signature)
    k1, k2 = inner.i, succ_above(inner.i, inner.j)
    kept = _survivors(size, (k1, k2))
    o1, o2 = kept[node.i], kept[succ_above(node.i, node.j)]
    return (o1, o2), (k1, k2)


def _contr_contr(node: Contr) -> TensorTree:
    (o1, o2), (k1, k2) = contraction_pairs(node)
    base = node.child.child
    size = len(base.signature)
    first = Contr(o1, pred_above(o1, o2), base)
    kept = _survivors(size, (o1, o2))
    a, b = kept.index(k1), kept.index(k2)
    second = Contr(a, pred_above(a, b), first)
    # la disposition plate rend la permutation induite triviale
    return Perm(Permutation.identity(node.signature), second)


def contractions_out_of_order(node: TensorTree) -> bool:
    """Vrai si la contraction externe a une clé plus petite que l'interne."""
    if not (isinstance(node, Contr) and isinstance(node.child, Contr)):
        return False
    outer, inner = contraction_pairs(node)
    return min(outer) < min(inner)


def _chain_keys(node: Contr) -> list[int]:
    """Clés (position minimale en coordonnées de base) d'une chaîne de contractions, de l'extérieur vers l'intérieur."""
    chain = []
    current: TensorTree = node
    while isinstance(current, Contr):
        chain.append(current)
        current = current.child
    kept = list(range(len(current.signature)))
    keys: list[int] = []
    for contr in reversed(chain):
        first, second = kept[contr.i], kept[succ_above(contr.i, contr.j)]
        keys.append(min(first, second))
        kept = [r for r in kept if r not in (first, second)]
    return list(reversed(keys))


# === Négations et scalaires ===

def _neg_fst_prod(node: Prod) -> TensorTree:
    return Neg(Prod(node.left.child, node.right))


def _neg_snd_prod(node: Prod) -> TensorTree:
    return Neg(Prod(node.left, node.right.child))


def _neg_contr(node: Contr) -> TensorTree:
    return Neg(Contr(node.i, node.j, node.child.child))


def _neg_eval(node: Eval) -> TensorTree:
    return Neg(Eval(node.i, node.x, node.child.child))


def _neg_neg(node: Neg) -> TensorTree:
    return node.child.child


def _action_neg(node: Action) -> TensorTree:
    return Neg(Action(node.element, node.child.child, node.name))


def _smul_fst_prod(node: Prod) -> TensorTree:
    return Smul(node.left.scalar, Prod(node.left.child, node.right))


def _smul_snd_prod(node: Prod) -> TensorTree:
    return Smul(node.right.scalar, Prod(node.left, node.right.child))


def _smul_contr(node: Contr) -> TensorTree:
    return Smul(node.child.scalar, Contr(node.i, node.j, node.child.child))


def _smul_eval(node: Eval) -> TensorTree:
    return Smul(node.child.scalar, Eval(node.i, node.x, node.child.child))


def _smul_neg(node: Smul) -> TensorTree:
    return Neg(Smul(node.scalar, node.child.child))


def _smul_smul(node: Smul) -> TensorTree:
    return Smul(node.scalar * node.child.scalar, node.child.child)


def _action_smul(node: Action) -> TensorTree:
    return Smul(node.child.scalar, Action(node.element, node.child.child, node.name))


# === Sommes ===

def _perm_add(node: Perm) -> TensorTree:
    return Add(Perm(node.perm, node.child.left), Perm(node.perm, node.child.right))


def _add_perm(node: Add) -> TensorTree:
    return Perm(node.left.perm, Add(node.left.child, node.right.child))


def _add_perm_matches(node: TensorTree) -> bool:
    return (
        isinstance(node, Add)
        and isinstance(node.left, Perm)
        and isinstance(node.right, Perm)
        and node.left.perm == node.right.perm
    )


def _neg_add(node: Neg) -> TensorTree:
    return Add(Neg(node.child.left), Neg(node.child.right))


def _smul_add(node: Smul) -> TensorTree:
    return Add(Smul(node.scalar, node.child.left), Smul(node.scalar, node.child.right))


def _prod_add_left(node: Prod) -> TensorTree:
    return Add(Prod(node.left.left, node.right), Prod(node.left.right, node.right))


def _prod_add_right(node: Prod) -> TensorTree:
    return Add(Prod(node.left, node.right.left), Prod(node.left, node.right.right))


def _contr_add(node: Contr) -> TensorTree:
    return Add(Contr(node.i, node.j, node.child.left), Contr(node.i, node.j, node.child.right))


def _eval_add(node: Eval) -> TensorTree:
    return Add(Eval(node.i, node.x, node.child.left), Eval(node.i, node.x, node.child.right))


def _action_add(node: Action) -> TensorTree:
    return Add(
        Action(node.element, node.child.left, node.name),
        Action(node.element, node.child.right, node.name),
    )


def _rule(name: str, matcher, builder, manual_only: bool = False) -> RewriteRule:
    return RewriteRule(name, matcher, builder, manual_only)


RULES: dict[str, RewriteRule] = {
    rule.name: rule
    for rule in (
        _rule("prod_perm_left", _shape(Prod, Perm, "left"), _prod_perm_left),
        _rule("prod_perm_right", _shape(Prod, Perm, "right"), _prod_perm_right),
        _rule("perm_perm", _shape(Perm, Perm), _perm_perm),
        _rule("perm_id", _is_identity_perm, _perm_id),
        _rule("perm_contr_congr", _shape(Contr, Perm), _perm_contr_congr),
        _rule("contr_contr", _shape(Contr, Contr), _contr_contr),
        _rule("neg_fst_prod", _shape(Prod, Neg, "left"), _neg_fst_prod),
        _rule("neg_snd_prod", _shape(Prod, Neg, "right"), _neg_snd_prod),
        _rule("neg_contr", _shape(Contr, Neg), _neg_contr),
        _rule("neg_perm", _shape(Neg, Perm), _neg_perm),
        _rule("neg_neg", _shape(Neg, Neg), _neg_neg),
        _rule("smul_fst_prod", _shape(Prod, Smul, "left"), _smul_fst_prod),
        _rule("smul_snd_prod", _shape(Prod, Smul, "right"), _smul_snd_prod),
        _rule("smul_contr", _shape(Contr, Smul), _smul_contr),
        _rule("smul_perm", _shape(Smul, Perm), _smul_perm),
        _rule("smul_neg", _shape(Smul, Neg), _smul_neg),
        _rule("smul_smul", _shape(Smul, Smul), _smul_smul),
        _rule("eval_perm", _shape(Eval, Perm), _eval_perm),
        _rule("neg_eval", _shape(Eval, Neg), _neg_eval),
        _rule("smul_eval", _shape(Eval, Smul), _smul_eval),
        _rule("action_perm", _shape(Action, Perm), _action_perm),
        _rule("action_neg", _shape(Action, Neg), _action_neg),
        _rule("action_smul", _shape(Action, Smul), _action_smul),
        _rule("perm_add", _shape(Perm, Add), _perm_add),
        _rule("neg_add", _shape(Neg, Add), _neg_add),
        _rule("smul_add", _shape(Smul, Add), _smul_add),
        _rule("prod_add_left", _shape(Prod, Add, "left"), _prod_add_left),
        _rule("prod_add_right", _shape(Prod, Add, "right"), _prod_add_right),
        _rule("contr_add", _shape(Contr, Add), _contr_add),
        _rule("eval_add", _shape(Eval, Add), _eval_add),
        _rule("action_add", _shape(Action, Add), _action_add),
        _rule("add_perm", _add_perm_matches, _add_perm, manual_only=True),
    )
}

NORMALIZE_PRIORITY: tuple[str, ...] = (
    "perm_id",
    "perm_perm",
    "neg_neg",
    "smul_smul",
    "smul_neg",
    "perm_add",
    "neg_add",
    "smul_add",
    "prod_add_left",
    "prod_add_right",
    "contr_add",
    "eval_add",
    "action_add",
    "prod_perm_left",
    "prod_perm_right",
    "perm_contr_congr",
    "eval_perm",
    "action_perm",
    "neg_perm",
    "smul_perm",
    "neg_fst_prod",
    "neg_snd_prod",
    "smul_fst_prod",
    "smul_snd_prod",
    "neg_contr",
    "smul_contr",
    "neg_eval",
    "smul_eval",
    "action_neg",
    "action_smul",
    "contr_contr",
)


def get_rule(rule: RewriteRule | str) -> RewriteRule:
    if isinstance(rule, RewriteRule):
        return rule
    try:
        return RULES[rule]
    except KeyError:
        raise UnknownConstantError(rule, known=sorted(RULES)) from None


def apply_rule(tree: TensorTree, path: Sequence[Step | str], rule: RewriteRule | str) -> TensorTree:
    """
    Applique une règle au sous-arbre désigné par path.

    Raises:
        NoMatchError: si la règle ne correspond pas au noeud visé.
    """
    rule = get_rule(rule)
    steps = parse_path(path)
    node = subtree_at(tree, steps)
    return replace_at(tree, steps, rule.apply(node))


# === Normalisation ===

def _is_summand_root(tree: TensorTree, path: Sequence[Step]) -> bool:
    node = tree
    for step in path:
        if not isinstance(node, Add):
            return False
        node = node.left if step == Step.LEFT else node.right
    return True


def _allowed(rule_name: str, node: TensorTree, summand_root: bool) -> bool:
    if rule_name == "perm_id":
        return not summand_root
    if rule_name == "contr_contr":
        return contractions_out_of_order(node)
    return True


def _find_redex(tree: TensorTree) -> tuple[tuple[Step, ...], TensorTree, RewriteRule] | None:
    for path, node in iter_nodes(tree):
        summand_root = _is_summand_root(tree, path)
        for name in NORMALIZE_PRIORITY:
            rule = RULES[name]
            if rule.matcher(node) and _allowed(name, node, summand_root):
                return path, node, rule
    return None


def _wrap_summands(tree: TensorTree) -> TensorTree:
    if isinstance(tree, Add):
        return Add(_wrap_summands(tree.left), _wrap_summands(tree.right))
    if isinstance(tree, Perm):
        return tree
    return Perm(Permutation.identity(tree.signature), tree)


def normalize_with_trace(
    tree: TensorTree,
    max_steps: int | None = None,
    trace: bool = True,
) -> tuple[TensorTree, list[RewriteStep]]:
    """
    Normalise l'arbre et retourne les étapes appliquées.

    Forme normale : sommes au sommet, chaque terme de la forme
    perm σ (neg? (smul? coeur)), sans perm/neg/smul sous prod, contr, eval ou
    action, contractions imbriquées triées par position de base croissante
    vers l'intérieur.

    Raises:
        NormalizationError: si max_steps est dépassé.
    """
    limit = settings.normalize_max_steps if max_steps is None else max_steps
    steps: list[RewriteStep] = []
    count = 0
    while True:
        found = _find_redex(tree)
        if found is None:
            break
        path, node, rule = found
        rewritten = rule.builder(node)
        if rule.name == "contr_contr" and not _is_summand_root(tree, path):
            rewritten = rewritten.child
        if trace:
            steps.append(RewriteStep(
                rule=rule.name,
                path=[str(s) for s in path],
                before=dump(node),
                after=dump(rewritten),
            ))
        tree = replace_at(tree, path, rewritten)
        count += 1
        if count > limit:
            raise NormalizationError(count)
    result = _wrap_summands(tree)
    logger.debug("normalisation", steps=count, result=dump(result))
    return result, steps


def normalize(tree: TensorTree, max_steps: int | None = None) -> TensorTree:
    """Forme normale déterministe de l'arbre (sémantique préservée)."""
    result, _ = normalize_with_trace(tree, max_steps=max_steps, trace=False)
    return result


def rewrite_measure(tree: TensorTree) -> tuple[int, ...]:
    """
    Mesure lexicographique qui décroît à chaque étape de normalize sur un arbre sans somme.

    Composantes : ancêtres structurels des perms non racines, nombre de perms
    non racines, ancêtres structurels des neg/smul, ancêtres neg/smul des perms,
    ancêtres smul des neg, nombre de neg/smul, inversions de contractions.
    """
    totals = [0] * 7

    def walk(node: TensorTree, structural: int, negsmul: int, smuls: int, is_root: bool) -> None:
        if isinstance(node, Perm) and not is_root:
            totals[0] += structural
            totals[1] += 1
            totals[3] += negsmul
        if isinstance(node, (Neg, Smul)):
            totals[2] += structural
            totals[5] += 1
            if isinstance(node, Neg):
                totals[4] += smuls
        for _, child in children(node):
            walk(
                child,
                structural + isinstance(node, (Prod, Contr, Eval, Action)),
                negsmul + isinstance(node, (Neg, Smul)),
                smuls + isinstance(node, Smul),
                False,
            )

    walk(tree, 0, 0, 0, True)
    totals[6] = _contraction_inversions(tree)
    return tuple(totals)


def _contraction_inversions(tree: TensorTree) -> int:
    total = 0
    for _, node in iter_nodes(tree):
        if not isinstance(node, Contr):
            continue
        keys = _chain_keys(node)
        outer = keys[0]
        total += sum(1 for inner in keys[1:] if outer < inner)
    return total


# === Égalité ===

def _compare(a: DenseTensor, b: DenseTensor, tol: float) -> tuple[bool, float, list[int]]:
    diff = np.abs(a.array - b.array)
    if diff.size == 0:
        return True, 0.0, []
    flat = int(np.argmax(diff))
    deviation = float(diff.reshape(-1)[flat])
    witness = [int(x) for x in np.unravel_index(flat, diff.shape)] if diff.ndim else []
    return deviation <= tol, deviation, witness


def check_equal(
    lhs: TensorTree,
    rhs: TensorTree,
    tol: float | None = None,
    samples: int | None = None,
    seed: int | None = None,
) -> EqualityVerdict:
    """
    Compare deux arbres.

    Normalise les deux membres et les compare structurellement ; en cas
    d'échec, compare leurs sémantiques composante par composante. Les arbres à
    feuilles variables sont comparés sur des instanciations aléatoires.

    Returns:
        EqualityVerdict (equal_by_normal_form, equal_numerically ou not_equal avec témoin).
    """
    tol = settings.invariance_tol if tol is None else tol
    samples = settings.numeric_samples if samples is None else samples

    if lhs.species is not rhs.species or lhs.signature != rhs.signature:
        verdict = EqualityVerdict(
            kind="not_equal",
            reason=f"signatures différentes: {list(lhs.signature)} / {list(rhs.signature)}",
        )
        logger.info("verdict", kind=verdict.kind, reason=verdict.reason)
        return verdict

    if structurally_equal(normalize(lhs), normalize(rhs)):
        logger.info("verdict", kind="equal_by_normal_form")
        return EqualityVerdict(kind="equal_by_normal_form")

    free = {**variables(lhs), **variables(rhs)}
    if not free:
        ok, deviation, witness = _compare(semantics(lhs), semantics(rhs), tol)
        verdict = EqualityVerdict(
            kind="equal_numerically" if ok else "not_equal",
            max_deviation=deviation,
            witness=None if ok else witness,
        )
        logger.info("verdict", kind=verdict.kind, max_deviation=deviation)
        return verdict

    rng = np.random.default_rng(settings.random_seed if seed is None else seed)
    worst, worst_witness, all_ok = 0.0, [], True
    for _ in range(samples):
        values = {
            name: DenseTensor.random(lhs.species, signature, rng)
            for name, signature in free.items()
        }
        ok, deviation, witness = _compare(
            semantics(instantiate(lhs, values)),
            semantics(instantiate(rhs, values)),
            tol,
        )
        all_ok = all_ok and ok
        if deviation >= worst:
            worst, worst_witness = deviation, witness
    verdict = EqualityVerdict(
        kind="equal_numerically" if all_ok else "not_equal",
        max_deviation=worst,
        witness=None if all_ok else worst_witness,
        samples=samples,
    )
    logger.info("verdict", kind=verdict.kind, max_deviation=worst, samples=samples)
    return verdict
