"""
Tests des générateurs aléatoires et du selftest.
"""

from types import SimpleNamespace

import numpy as np
import pytest

from app.services.rewrite import RULES
from app.services.sampling import (
    NODE_KINDS,
    contraction_child_signature,
    deviation,
    random_permutation,
    random_redex,
    random_tree,
    soundness_sweep,
)
from app.services.tensor import DenseTensor, succ_above
from app.services.tree import Contr, Smul, iter_nodes, leaf, node_kind


class TestRandomTree:
    """Arbres aléatoires bien typés."""

    @pytest.mark.parametrize("rank", [0, 1, 2, 3])
    def test_signature_is_respected(self, mixed, rank):
        rng = np.random.default_rng(rank)
        signature = tuple(mixed.colors[k % len(mixed.colors)] for k in range(rank))
        for _ in range(10):
            assert random_tree(rng, mixed, signature, depth=3).signature == signature

    def test_allow_restricts_node_kinds(self, unit):
        rng = np.random.default_rng(1)
        allow = ("leaf", "neg", "prod")
        for _ in range(10):
            tree = random_tree(rng, unit, ("u", "u"), depth=4, allow=allow)
            kinds = {node_kind(node) for _, node in iter_nodes(tree)}
            assert kinds <= {"tensor", "neg", "prod"}

    def test_max_rank_bounds_contractions(self, mixed):
        rng = np.random.default_rng(2)
        for _ in range(10):
            tree = random_tree(rng, mixed, ("a", "v"), depth=4, max_rank=4)
            for _, node in iter_nodes(tree):
                if isinstance(node, Contr):
                    assert len(node.child.signature) <= 4

    def test_node_kinds_cover_the_ir(self):
        assert len(NODE_KINDS) == 9


class TestHelpers:
    """Permutations et signatures de contraction."""

    def test_random_permutation_target(self, mixed):
        rng = np.random.default_rng(3)
        target = ("a", "s", "v")
        sigma = random_permutation(rng, target)
        assert sigma.target == target
        assert sorted(sigma.source) == sorted(target)

    def test_contraction_child_signature(self, mixed):
        rng = np.random.default_rng(4)
        for _ in range(20):
            i, j, child = contraction_child_signature(rng, mixed, ("a", "s"))
            k = succ_above(i, j, len(child))
            assert mixed.dual(child[i]) == child[k]
            rest = tuple(c for p, c in enumerate(child) if p not in (i, k))
            assert rest == ("a", "s")


class TestRedex:
    """Redex aléatoires par règle."""

    @pytest.mark.parametrize("rule", sorted(RULES))
    def test_redex_matches_its_rule(self, rule, mixed):
        rng = np.random.default_rng(9)
        for _ in range(5):
            assert RULES[rule].matches(random_redex(rng, mixed, rule))

    def test_sweep_is_reproducible(self, unit):
        first = soundness_sweep("prod_perm_left", unit, cases=10, seed=42)
        second = soundness_sweep("prod_perm_left", unit, cases=10, seed=42)
        assert first == second
        assert first.cases == 10 and first.species == "unit"

    def test_sweep_reports_absolute_deviation(self, unit, monkeypatch):
        """Une réécriture décalée de 1e-11 en relatif sur 1e6 donne un écart brut de 1e-5."""
        big = leaf(DenseTensor.from_array(unit, ("u",), [1e6]), "t")
        monkeypatch.setattr("app.services.sampling.random_redex", lambda rng, species, rule, depth: big)
        monkeypatch.setattr(
            "app.services.sampling.get_rule",
            lambda name: SimpleNamespace(apply=lambda tree: Smul(1 + 1e-11, tree)),
        )
        result = soundness_sweep("neg_neg", unit, cases=3, tol=1e-10, seed=0)
        assert result.max_deviation == pytest.approx(1e-5, rel=1e-3)
        assert result.normalize_deviation == 0.0
        assert not result.passed

    def test_deviation_is_raw(self, unit):
        a = DenseTensor.from_array(unit, ("u",), [1e6])
        b = DenseTensor.from_array(unit, ("u",), [1e6 + 1e-5])
        assert deviation(a, b) == pytest.approx(1e-5, rel=1e-3)


class TestSelftest:
    """Selftest sur un sous-ensemble de règles."""

    def test_subset_passes(self):
        from app.cli import run_selftest

        results = run_selftest(cases=5, lorentz_cases=2, workers=2, seed=0, rules=["neg_neg", "contr_contr"])
        assert len(results) == 4
        assert {(r.rule, r.species) for r in results} == {
            ("neg_neg", "unit"),
            ("neg_neg", "complex-lorentz"),
            ("contr_contr", "unit"),
            ("contr_contr", "complex-lorentz"),
        }
        assert all(r.all_passed for r in results)
