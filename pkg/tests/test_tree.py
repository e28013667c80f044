"""
Tests des arbres de tenseurs : typage à la construction, sémantique,
chemins, remplacement et dump canonique.
"""

import itertools

import numpy as np
import pytest

from app.core.error_handler import (
    DualityError,
    IndexOutOfRangeError,
    InvalidInputError,
    SignatureMismatchError,
)
from app.services.tensor import DenseTensor, Permutation, contract, permute, tensor_product
from app.services.tree import (
    Add,
    Contr,
    Eval,
    Neg,
    Perm,
    Prod,
    Smul,
    Step,
    TensorNode,
    dump,
    instantiate,
    iter_nodes,
    leaf,
    replace_at,
    semantics,
    signature_of,
    structurally_equal,
    subtree_at,
    variables,
)


@pytest.fixture
def example_tensors(lorentz, rng):
    """A^{μν} et S_{μν} aléatoires."""
    a = DenseTensor.random(lorentz, ("up", "up"), rng)
    s = DenseTensor.random(lorentz, ("down", "down"), rng)
    return a, s


def _example_lhs(a, s):
    return Contr(0, 0, Contr(0, 1, Prod(leaf(a, "A"), leaf(s, "S"))))


class TestConstruction:
    """Un arbre mal typé ne se construit pas."""

    def test_signatures(self, lorentz, rng):
        t = leaf(DenseTensor.random(lorentz, ("up", "down", "up"), rng), "T")
        assert signature_of(t) == ("up", "down", "up")
        assert signature_of(Contr(0, 0, t)) == ("up",)
        left = leaf(DenseTensor.random(lorentz, ("upL",), rng), "L")
        right = leaf(DenseTensor.random(lorentz, ("downR", "up"), rng), "R")
        assert signature_of(Prod(left, right)) == ("upL", "downR", "up")

    def test_contr_duality_checked(self, lorentz, rng):
        t = leaf(DenseTensor.random(lorentz, ("up", "up"), rng), "T")
        with pytest.raises(DualityError):
            Contr(0, 0, t)

    def test_contr_bounds_checked(self, lorentz, rng):
        t = leaf(DenseTensor.random(lorentz, ("up", "down"), rng), "T")
        with pytest.raises(IndexOutOfRangeError):
            Contr(0, 1, t)

    def test_add_signatures_checked(self, lorentz, rng):
        a = leaf(DenseTensor.random(lorentz, ("up",), rng), "a")
        b = leaf(DenseTensor.random(lorentz, ("down",), rng), "b")
        with pytest.raises(SignatureMismatchError):
            Add(a, b)

    def test_perm_source_checked(self, lorentz, rng):
        t = leaf(DenseTensor.random(lorentz, ("up", "down"), rng), "T")
        with pytest.raises(SignatureMismatchError):
            Perm(Permutation.identity(("down", "up")), t)

    def test_eval_bounds_checked(self, lorentz, rng):
        t = leaf(DenseTensor.random(lorentz, ("up",), rng), "T")
        with pytest.raises(IndexOutOfRangeError):
            Eval(1, 0, t)


class TestSemantics:
    """Réduction d'un arbre en tenseur dense."""

    def test_leaf_and_smul(self, lorentz, rng):
        t = DenseTensor.random(lorentz, ("up",), rng)
        assert semantics(leaf(t)) is t
        np.testing.assert_allclose(semantics(Smul(2, leaf(t))).data, 2 * t.data)
        np.testing.assert_allclose(semantics(Neg(leaf(t))).data, -t.data)

    @pytest.mark.oracle
    def test_example_lhs_against_double_sum(self, example_tensors):
        a, s = example_tensors
        expected = sum(a[(m, n)] * s[(m, n)] for m, n in itertools.product(range(4), repeat=2))
        assert abs(semantics(_example_lhs(a, s))[()] - expected) < 1e-10

    def test_matches_kernels(self, lorentz, rng):
        a = DenseTensor.random(lorentz, ("up", "downL"), rng)
        b = DenseTensor.random(lorentz, ("upL",), rng)
        sigma = Permutation.from_mapping(("up",), (0,))
        tree = Perm(sigma, Contr(1, 1, Prod(leaf(a), leaf(b))))
        expected = permute(contract(tensor_product(a, b), 1, 1), sigma)
        assert semantics(tree).allclose(expected, 0.0)

    def test_eval_node(self, lorentz):
        delta = DenseTensor.from_array(lorentz, ("down", "up"), np.eye(4))
        np.testing.assert_array_equal(semantics(Eval(0, 2, leaf(delta))).array, [0, 0, 1, 0])


class TestPaths:
    """Navigation et remplacement par chemin."""

    def test_subtree_at(self, example_tensors):
        tree = _example_lhs(*example_tensors)
        node = subtree_at(tree, ["only", "only", "left"])
        assert isinstance(node, TensorNode) and node.name == "A"

    def test_step_aliases(self):
        assert Step("child") is Step.ONLY
        assert Step("l") is Step.LEFT
        assert Step("snd") is Step.RIGHT

    def test_invalid_path(self, example_tensors):
        tree = _example_lhs(*example_tensors)
        with pytest.raises(InvalidInputError):
            subtree_at(tree, ["left"])
        with pytest.raises(InvalidInputError):
            subtree_at(tree, ["sideways"])

    def test_replace_with_itself(self, example_tensors):
        tree = _example_lhs(*example_tensors)
        path = ["only", "only", "right"]
        same = replace_at(tree, path, subtree_at(tree, path))
        assert structurally_equal(same, tree)

    def test_replace_with_equal_semantics(self, lorentz, example_tensors):
        """A antisymétrique remplacé par perm swap (neg A) : sémantique inchangée."""
        a, s = example_tensors
        anti = DenseTensor.from_array(lorentz, ("up", "up"), a.array - a.array.T)
        tree = _example_lhs(anti, s)
        swap = Permutation.from_mapping(("up", "up"), (1, 0))
        replaced = replace_at(tree, ["only", "only", "left"], Perm(swap, Neg(leaf(anti, "A"))))
        assert abs(semantics(replaced)[()] - semantics(tree)[()]) < 1e-10

    def test_replace_with_zero_under_contr(self, lorentz, example_tensors):
        tree = _example_lhs(*example_tensors)
        zero = leaf(DenseTensor.zeros(lorentz, ("down", "down")), "Z")
        replaced = replace_at(tree, ["only", "only", "right"], zero)
        assert semantics(replaced)[()] == 0

    def test_replace_signature_mismatch(self, lorentz, example_tensors):
        tree = _example_lhs(*example_tensors)
        wrong = leaf(DenseTensor.zeros(lorentz, ("up", "down")), "W")
        with pytest.raises(SignatureMismatchError):
            replace_at(tree, ["only", "only", "right"], wrong)

    def test_iter_nodes_is_postorder(self, example_tensors):
        tree = _example_lhs(*example_tensors)
        kinds = [type(node).__name__ for _, node in iter_nodes(tree)]
        assert kinds == ["TensorNode", "TensorNode", "Prod", "Contr", "Contr"]


class TestVariables:
    """Feuilles variables et instanciation."""

    def test_instantiate(self, lorentz, rng):
        x = TensorNode(DenseTensor.zeros(lorentz, ("up",)), "X", variable=True)
        tree = Neg(x)
        assert variables(tree) == {"X": ("up",)}
        value = DenseTensor.random(lorentz, ("up",), rng)
        np.testing.assert_allclose(semantics(instantiate(tree, {"X": value})).data, -value.data)

    def test_instantiate_wrong_signature(self, lorentz):
        x = TensorNode(DenseTensor.zeros(lorentz, ("up",)), "X", variable=True)
        with pytest.raises(SignatureMismatchError):
            instantiate(x, {"X": DenseTensor.zeros(lorentz, ("down",))})


class TestDump:
    """Dump canonique en s-expression."""

    def test_example_lhs(self, example_tensors):
        assert dump(_example_lhs(*example_tensors)) == '(contr 0 0 (contr 0 1 (prod (tensor "A") (tensor "S"))))'

    def test_all_unary_nodes(self, lorentz, rng):
        t = leaf(DenseTensor.random(lorentz, ("up", "down"), rng), "T")
        swap = Permutation.from_mapping(("up", "down"), (1, 0))
        assert dump(Perm(swap, Neg(Smul(0.5, t)))) == '(perm [1 0] (neg (smul 0.5 (tensor "T"))))'
        assert dump(Eval(0, 3, t)) == '(eval 0 3 (tensor "T"))'
        assert dump(leaf(DenseTensor.scalar(lorentz, 1))) == "(tensor _)"

    def test_structural_equality(self, lorentz, rng):
        t = DenseTensor.random(lorentz, ("up",), rng)
        assert structurally_equal(Smul(2, leaf(t, "t")), Smul(2, leaf(t, "t")))
        assert not structurally_equal(Smul(2, leaf(t, "t")), Smul(3, leaf(t, "t")))
        assert not structurally_equal(leaf(t, "t"), leaf(t, "u"))
