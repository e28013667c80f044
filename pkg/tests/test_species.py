"""
Tests des espèces de tenseurs.

- Dualité, dimensions et données de contraction
- Audit des quatre axiomes
- Invariance de la représentation
- Éléments de groupe
"""

import numpy as np
import pytest

from app.core.error_handler import GroupElementError, UnknownColorError, UnknownConstantError
from app.services.species import (
    GroupElement,
    check_axioms,
    check_invariance,
    contraction_form,
    dual_color,
    get_species,
    sample_sl2c,
)


class TestDuality:
    """Involution τ."""

    @pytest.mark.parametrize("color, dual", [
        ("up", "down"), ("down", "up"), ("upL", "downL"), ("downR", "upR"),
    ])
    def test_lorentz_dual_table(self, lorentz, color, dual):
        assert dual_color(lorentz, color) == dual

    def test_dual_is_involution(self, lorentz, mixed, unit):
        for species in (lorentz, mixed, unit):
            for c in species.colors:
                assert dual_color(species, dual_color(species, c)) == c

    def test_unknown_color_rejected(self, lorentz):
        with pytest.raises(UnknownColorError):
            dual_color(lorentz, "sideways")

    def test_dimensions(self, lorentz):
        assert [lorentz.rep_dim(c) for c in ("upL", "downL", "upR", "downR", "up", "down")] == [2, 2, 2, 2, 4, 4]

    def test_contraction_form_is_identity(self, lorentz):
        np.testing.assert_array_equal(contraction_form(lorentz, "up"), np.eye(4))
        np.testing.assert_array_equal(contraction_form(lorentz, "upL"), np.eye(2))


class TestAxioms:
    """Audit des axiomes d'espèce."""

    def test_lorentz_axioms_pass(self, lorentz):
        report = check_axioms(lorentz, 1e-12)
        assert report.all_passed
        assert [r.color for r in report.colors] == list(lorentz.colors)

    def test_unit_and_mixed_axioms_pass(self, unit, mixed):
        assert check_axioms(unit).all_passed
        assert check_axioms(mixed).all_passed

    def test_zero_metric_breaks_both_colors(self, lorentz):
        """Une métrique nulle sur up fait échouer contr_metric pour up et pour down."""
        broken = lorentz.with_metric("up", np.zeros((4, 4)))
        report = check_axioms(broken, 1e-12)
        assert not report.all_passed
        failing = {(f["color"], f["axiom"]) for f in report.failures()}
        assert failing == {("up", "contr_metric"), ("down", "contr_metric")}

    def test_report_text(self, unit):
        text = check_axioms(unit).to_text()
        assert "species unit" in text
        assert "all axioms pass" in text

    def test_non_positive_tolerance_rejected(self, unit):
        from app.core.error_handler import InvalidInputError
        with pytest.raises(InvalidInputError):
            check_axioms(unit, 0.0)


class TestInvariance:
    """Propriétés de la représentation sur des éléments aléatoires."""

    def test_lorentz_representation(self, lorentz):
        report = check_invariance(lorentz, samples=20, tol=1e-8, seed=7)
        assert report.all_passed, report.to_text()

    def test_identity_maps_to_identity(self, lorentz):
        identity = lorentz.identity_element()
        for c in lorentz.colors:
            np.testing.assert_allclose(lorentz.rep_matrix(c, identity), np.eye(lorentz.rep_dim(c)), atol=1e-14)

    def test_wrong_group_size_rejected(self, lorentz):
        with pytest.raises(GroupElementError):
            lorentz.rep_matrix("up", GroupElement(np.array([[1.0]])))


class TestGroupElement:
    """Éléments de SL(2,ℂ) et phases."""

    def test_sampled_element_has_unit_determinant(self, rng):
        for _ in range(20):
            g = sample_sl2c(rng)
            assert abs(np.linalg.det(g.matrix) - 1) < 1e-10

    def test_bad_determinant_rejected(self):
        with pytest.raises(GroupElementError):
            GroupElement(np.diag([2.0, 1.0]))

    def test_non_square_rejected(self):
        with pytest.raises(GroupElementError):
            GroupElement(np.ones((2, 3)))

    def test_inverse(self, rng):
        g = sample_sl2c(rng)
        np.testing.assert_allclose((g @ g.inverse()).matrix, np.eye(2), atol=1e-10)


class TestGetSpecies:
    """Résolution des espèces par nom."""

    @pytest.mark.parametrize("name", ["complex-lorentz", "complex_lorentz", "Lorentz"])
    def test_lorentz_aliases(self, name, lorentz):
        assert get_species(name) is lorentz

    @pytest.mark.parametrize("name", ["unit", "unit-species", "UNIT_SPECIES"])
    def test_unit_aliases(self, name, unit):
        assert get_species(name) is unit

    def test_unknown_species(self):
        with pytest.raises(UnknownConstantError) as exc:
            get_species("real-lorentz")
        assert exc.value.status_code == 404
