"""
Tests du moteur de réécriture.

- Application dirigée par chemin et erreurs NoMatch
- Correction de chaque règle (balayages aléatoires)
- Normalisation : forme, idempotence, préservation de la sémantique
- Comparaison d'arbres (verdicts)
"""

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from app.core.error_handler import NoMatchError, NormalizationError, UnknownConstantError
from app.services.rewrite import (
    RULES,
    apply_rule,
    check_equal,
    contractions_out_of_order,
    normalize,
    normalize_with_trace,
    rewrite_measure,
)
from app.services.sampling import random_tree, soundness_sweep
from app.services.syntax import Environment, elaborate_text
from app.services.tensor import DenseTensor, Permutation
from app.services.tree import (
    Contr,
    Neg,
    Perm,
    Prod,
    Smul,
    TensorNode,
    dump,
    leaf,
    semantics,
    structurally_equal,
)

EXAMPLE = "{A | μ ν ⊗ S | μ ν = - A | μ ν ⊗ S | μ ν}ᵀ"


def _close(a, b, tol=1e-10):
    return a.signature == b.signature and (a.data.size == 0 or float(np.max(np.abs(a.data - b.data))) <= tol)


@pytest.fixture
def example_env(lorentz, rng):
    raw = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    sym = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    return Environment(tensors={
        "A": DenseTensor.from_array(lorentz, ("up", "up"), raw - raw.T),
        "S": DenseTensor.from_array(lorentz, ("down", "down"), sym + sym.T),
    })


class TestApplyRule:
    """Application d'une règle en un chemin."""

    def test_neg_neg_at_root(self, lorentz, rng):
        t = leaf(DenseTensor.random(lorentz, ("up",), rng), "t")
        assert apply_rule(Neg(Neg(t)), [], "neg_neg") is t

    def test_perm_perm_with_inverse(self, lorentz, rng):
        t = leaf(DenseTensor.random(lorentz, ("up", "down", "upL"), rng), "t")
        sigma = Permutation.from_mapping(t.signature, (2, 0, 1))
        rewritten = apply_rule(Perm(sigma.inverse(), Perm(sigma, t)), [], "perm_perm")
        assert isinstance(rewritten, Perm) and rewritten.perm.is_identity
        assert semantics(rewritten).allclose(semantics(t), 0.0)

    def test_prod_perm_left_below_contractions(self, lorentz, rng):
        """Sort la permutation du facteur gauche, sous les deux contractions."""
        a = leaf(DenseTensor.random(lorentz, ("up", "up"), rng), "A")
        s = leaf(DenseTensor.random(lorentz, ("down", "down"), rng), "S")
        swap = Permutation.from_mapping(("up", "up"), (1, 0))
        tree = Contr(0, 0, Contr(0, 1, Prod(Perm(swap, Neg(a)), s)))
        rewritten = apply_rule(tree, ["child", "child"], "prod_perm_left")
        assert dump(rewritten) == (
            '(contr 0 0 (contr 0 1 (perm [1 0 2 3] (prod (neg (tensor "A")) (tensor "S")))))'
        )
        assert _close(semantics(rewritten), semantics(tree))

    def test_no_match(self, lorentz, rng):
        t = leaf(DenseTensor.random(lorentz, ("up",), rng), "t")
        with pytest.raises(NoMatchError) as exc:
            apply_rule(Neg(t), [], "perm_perm")
        assert exc.value.rule == "perm_perm"
        assert exc.value.shape == "neg(tensor)"

    def test_unknown_rule(self, lorentz, rng):
        t = leaf(DenseTensor.random(lorentz, ("up",), rng), "t")
        with pytest.raises(UnknownConstantError):
            apply_rule(t, [], "teleport")


class TestRuleSoundness:
    """Chaque règle préserve la sémantique sur des redex aléatoires."""

    @pytest.mark.parametrize("rule", sorted(RULES))
    def test_unit_species(self, rule, unit):
        result = soundness_sweep(rule, unit, cases=200, seed=11)
        assert result.all_passed, result.to_text()

    @pytest.mark.parametrize("rule", sorted(RULES))
    def test_mixed_species(self, rule, mixed):
        result = soundness_sweep(rule, mixed, cases=40, seed=5)
        assert result.all_passed, result.to_text()

    @pytest.mark.slow
    @pytest.mark.parametrize("rule", sorted(RULES))
    def test_lorentz_species(self, rule, lorentz):
        result = soundness_sweep(rule, lorentz, cases=50, seed=3)
        assert result.all_passed, result.to_text()


class TestNormalize:
    """Forme normale."""

    def test_example_right_hand_side(self, example_env):
        _, rhs = elaborate_text(EXAMPLE, example_env)
        assert dump(normalize(rhs)) == (
            '(perm [] (neg (contr 0 0 (contr 0 1 (prod (tensor "A") (tensor "S"))))))'
        )

    def test_substituted_left_hand_side(self, lorentz, example_env):
        """A ← perm swap (neg A), S ← perm swap S : la forme normale porte la négation."""
        lhs, _ = elaborate_text(EXAMPLE, example_env)
        swap_up = Permutation.from_mapping(("up", "up"), (1, 0))
        swap_down = Permutation.from_mapping(("down", "down"), (1, 0))
        a, s = example_env.tensors["A"], example_env.tensors["S"]
        substituted = Contr(0, 0, Contr(0, 1, Prod(
            Perm(swap_up, Neg(leaf(a, "A"))),
            Perm(swap_down, leaf(s, "S")),
        )))
        assert _close(semantics(substituted), semantics(lhs))
        normal = normalize(substituted)
        assert dump(normal) == (
            '(perm [] (neg (contr 0 0 (contr 0 1 (prod (tensor "A") (tensor "S"))))))'
        )
        assert _close(semantics(normal), semantics(lhs))

    def test_contractions_are_sorted(self, lorentz, rng):
        t = leaf(DenseTensor.random(lorentz, ("up", "down", "up", "down"), rng), "T")
        tree = Contr(0, 0, Contr(2, 2, t))
        assert contractions_out_of_order(tree)
        normal = normalize(tree)
        assert dump(normal) == '(perm [] (contr 0 0 (contr 0 0 (tensor "T"))))'
        assert _close(semantics(normal), semantics(tree))

    def test_trace_lists_rules(self, lorentz, rng):
        t = leaf(DenseTensor.random(lorentz, ("up",), rng), "t")
        result, steps = normalize_with_trace(Smul(2, Neg(Neg(t))))
        assert [step.rule for step in steps] == ["neg_neg"]
        assert dump(result) == '(perm [0] (smul 2 (tensor "t")))'

    def test_measure_decreases(self, lorentz, rng):
        a = leaf(DenseTensor.random(lorentz, ("up", "down"), rng), "a")
        b = leaf(DenseTensor.random(lorentz, ("upL",), rng), "b")
        swap = Permutation.from_mapping(("up", "down"), (1, 0))
        tree = Prod(Perm(swap, a), b)
        rewritten = apply_rule(tree, [], "prod_perm_left")
        assert rewrite_measure(rewritten) < rewrite_measure(tree)

    def test_step_limit(self, lorentz, rng):
        t = leaf(DenseTensor.random(lorentz, ("up",), rng), "t")
        with pytest.raises(NormalizationError):
            normalize(Neg(Neg(Neg(Neg(t)))), max_steps=0)

    @settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
    @given(seed=st.integers(min_value=0, max_value=2**32 - 1), rank=st.integers(min_value=0, max_value=3))
    def test_sound_and_idempotent(self, mixed, seed, rank):
        rng = np.random.default_rng(seed)
        signature = tuple(mixed.colors[int(k)] for k in rng.integers(0, len(mixed.colors), size=rank))
        tree = random_tree(rng, mixed, signature, depth=4)
        normal = normalize(tree)
        assert _close(semantics(normal), semantics(tree))
        assert structurally_equal(normalize(normal), normal)


class TestCheckEqual:
    """Verdicts de comparaison."""

    def test_reflexive(self, lorentz, rng):
        t = leaf(DenseTensor.random(lorentz, ("up", "down"), rng), "t")
        assert check_equal(t, t).kind == "equal_by_normal_form"

    def test_antisymmetric_times_symmetric(self, example_env):
        lhs, rhs = elaborate_text(EXAMPLE, example_env)
        verdict = check_equal(lhs, rhs)
        assert verdict.kind == "equal_numerically"
        assert check_equal(rhs, lhs).is_equal

    def test_hypothesis_violated(self, lorentz, rng):
        a = rng.standard_normal((4, 4))
        s = rng.standard_normal((4, 4))
        env = Environment(tensors={
            "A": DenseTensor.from_array(lorentz, ("up", "up"), a + a.T),
            "S": DenseTensor.from_array(lorentz, ("down", "down"), s + s.T),
        })
        lhs, rhs = elaborate_text(EXAMPLE, env)
        verdict = check_equal(lhs, rhs)
        assert verdict.kind == "not_equal"
        assert verdict.witness == []
        assert verdict.max_deviation > 0

    def test_witness(self, lorentz):
        t = DenseTensor.from_array(lorentz, ("upL",), [0.0, 1.0])
        verdict = check_equal(leaf(t, "t"), Smul(2, leaf(t, "t")))
        assert verdict.kind == "not_equal"
        assert verdict.witness == [1]
        assert verdict.max_deviation == pytest.approx(1.0)

    def test_signature_mismatch(self, lorentz, rng):
        a = leaf(DenseTensor.random(lorentz, ("up",), rng), "a")
        b = leaf(DenseTensor.random(lorentz, ("down",), rng), "b")
        verdict = check_equal(a, b)
        assert verdict.kind == "not_equal"
        assert "signatures" in verdict.reason

    def test_variable_leaves(self, lorentz):
        x = TensorNode(DenseTensor.zeros(lorentz, ("up",)), "X", variable=True)
        y = TensorNode(DenseTensor.zeros(lorentz, ("upL",)), "Y", variable=True)
        env = Environment(tensors={"X": x.tensor, "Y": y.tensor}, variables={"X", "Y"})
        lhs, rhs = elaborate_text("{X | μ ⊗ Y | α = Y | α ⊗ X | μ}ᵀ", env)
        verdict = check_equal(lhs, rhs, samples=5, seed=0)
        assert verdict.kind == "equal_numerically"
        assert verdict.samples == 5

    def test_variable_leaves_not_equal(self, lorentz):
        env = Environment(tensors={"X": DenseTensor.zeros(lorentz, ("up",))}, variables={"X"})
        lhs, rhs = elaborate_text("{X | μ = 2 •ₜ X | μ}ᵀ", env)
        assert check_equal(lhs, rhs, samples=3, seed=1).kind == "not_equal"

    def test_tolerance_is_absolute(self, lorentz):
        """Un écart de 1e-5 sur des composantes de l'ordre de 1e6 dépasse tol=1e-10."""
        big = DenseTensor.from_array(lorentz, ("upL",), [1e6, 0.0])
        shifted = DenseTensor.from_array(lorentz, ("upL",), [1e6 + 1e-5, 0.0])
        verdict = check_equal(leaf(big, "t"), leaf(shifted, "t"), tol=1e-10)
        assert verdict.kind == "not_equal"
        assert verdict.witness == [0]
        assert verdict.max_deviation == pytest.approx(1e-5, rel=1e-3)

    def test_large_values_within_tolerance(self, lorentz):
        big = DenseTensor.from_array(lorentz, ("upL",), [1e6, 0.0])
        verdict = check_equal(leaf(big, "t"), Neg(Neg(leaf(big, "t"))), tol=1e-10)
        assert verdict.is_equal
