"""
Tests de l'API HTTP.

Tests couvrant:
- Routes de santé
- Endpoints expressions (parse, evaluate, simplify, prove-eq)
- Endpoints espèces (axiomes, constantes)
- Codes HTTP des erreurs de domaine
"""

import pytest

from app.services.lorentz import PAULI_CONTRACTION


class TestHealthEndpoints:
    """Tests des routes de base."""

    def test_root(self, test_client):
        """La racine décrit l'application."""
        response = test_client.get("/")
        assert response.status_code == 200
        assert response.json()["status"] == "running"

    def test_health_lists_species(self, test_client):
        """Chaque espèce se construit."""
        response = test_client.get("/health")
        assert response.status_code == 200
        data = response.json()
        assert data["status"] == "healthy"
        assert data["species"]["complex-lorentz"] == "ok (6 couleurs)"
        assert data["species"]["unit"] == "ok (1 couleurs)"

    def test_ready(self, test_client):
        response = test_client.get("/ready")
        assert response.status_code == 200
        assert "X-Process-Time" in response.headers


class TestParseEndpoint:
    """Tests de /api/v1/expressions/parse."""

    def test_tree(self, test_client):
        response = test_client.post(
            "/api/v1/expressions/parse",
            json={"expression": "{η | μ ν ⊗ η' | ν σ}ᵀ"},
        )
        assert response.status_code == 200
        data = response.json()
        assert data["tree"] == "(contr 1 1 (prod (tensor \"η\") (tensor \"η'\")))"
        assert data["signature"] == ["up", "down"]

    def test_equation(self, test_client):
        response = test_client.post(
            "/api/v1/expressions/parse",
            json={"expression": "{η | μ ν = η | ν μ}ᵀ"},
        )
        data = response.json()
        assert data["tree"] is None
        assert data["rhs"] == "(perm [1 0] (tensor \"η\"))"

    def test_parse_error_returns_400(self, test_client):
        """Une erreur de syntaxe retourne 400 avec la position."""
        response = test_client.post("/api/v1/expressions/parse", json={"expression": "{T | μ"})
        assert response.status_code == 400
        data = response.json()
        assert data["category"] == "parse"
        assert data["details"]["offset"] == 7

    @pytest.mark.parametrize("expression, category", [
        ("{η | μ}ᵀ", "elaborate-arity"),
        ("{η | μ μ}ᵀ", "elaborate-duality"),
        ("{Q | μ}ᵀ", "env-missing"),
    ])
    def test_elaboration_errors_return_400(self, test_client, expression, category):
        response = test_client.post("/api/v1/expressions/parse", json={"expression": expression})
        assert response.status_code == 400
        assert response.json()["category"] == category

    def test_unknown_species_returns_422(self, test_client):
        """Espèce inconnue rejetée par la validation."""
        response = test_client.post(
            "/api/v1/expressions/parse",
            json={"expression": "{η | μ ν}ᵀ", "species": "real-lorentz"},
        )
        assert response.status_code == 422

    def test_empty_expression_returns_422(self, test_client):
        response = test_client.post("/api/v1/expressions/parse", json={"expression": ""})
        assert response.status_code == 422


class TestEvaluateEndpoint:
    """Tests de /api/v1/expressions/evaluate."""

    def test_unit_species_with_env(self, test_client):
        response = test_client.post(
            "/api/v1/expressions/evaluate",
            json={
                "expression": "{c •ₜ T | a a}ᵀ",
                "species": "unit",
                "env": [
                    {"name": "T", "signature": ["u", "u"], "data": [[2, 0]]},
                    {"name": "c", "scalar": [0, 1]},
                ],
            },
        )
        assert response.status_code == 200
        tensor = response.json()["tensor"]
        assert tensor["signature"] == []
        assert tensor["data"] == [[0.0, 2.0]]

    def test_minkowski_metric(self, test_client):
        response = test_client.post("/api/v1/expressions/evaluate", json={"expression": "{η | 0 0}ᵀ"})
        assert response.status_code == 200
        assert response.json()["tensor"]["data"] == [[1.0, 0.0]]

    def test_equation_rejected(self, test_client):
        response = test_client.post(
            "/api/v1/expressions/evaluate",
            json={"expression": "{η | μ ν = η | μ ν}ᵀ"},
        )
        assert response.status_code == 400
        assert response.json()["category"] == "invalid-input"

    def test_invalid_env_entry(self, test_client):
        response = test_client.post(
            "/api/v1/expressions/evaluate",
            json={
                "expression": "{T | a}ᵀ",
                "species": "unit",
                "env": [{"name": "T", "signature": ["u"], "data": [[1, 2, 3]]}],
            },
        )
        assert response.status_code == 400


class TestSimplifyEndpoint:
    """Tests de /api/v1/expressions/simplify."""

    def test_steps(self, test_client):
        response = test_client.post(
            "/api/v1/expressions/simplify",
            json={"expression": "{- - η | μ ν}ᵀ", "trace": True},
        )
        assert response.status_code == 200
        data = response.json()
        assert data["tree"] == "(perm [0 1] (tensor \"η\"))"
        assert [step["rule"] for step in data["steps"]] == ["neg_neg"]

    def test_no_trace(self, test_client):
        response = test_client.post(
            "/api/v1/expressions/simplify",
            json={"expression": "{- - η | μ ν}ᵀ"},
        )
        assert response.json()["steps"] == []


class TestProveEqEndpoint:
    """Tests de /api/v1/expressions/prove-eq."""

    def test_pauli_contraction(self, test_client):
        response = test_client.post("/api/v1/expressions/prove-eq", json={"expression": PAULI_CONTRACTION})
        assert response.status_code == 200
        assert response.json()["verdict"]["kind"] in ("equal_by_normal_form", "equal_numerically")

    def test_not_equal_is_200(self, test_client):
        """Un verdict not_equal n'est pas une erreur HTTP."""
        response = test_client.post(
            "/api/v1/expressions/prove-eq",
            json={"expression": "{η | μ ν = 2 •ₜ η | μ ν}ᵀ"},
        )
        assert response.status_code == 200
        verdict = response.json()["verdict"]
        assert verdict["kind"] == "not_equal"
        assert verdict["witness"] == [0, 0]

    def test_requires_equation(self, test_client):
        response = test_client.post("/api/v1/expressions/prove-eq", json={"expression": "{η | μ ν}ᵀ"})
        assert response.status_code == 400

    def test_invalid_tolerance_returns_422(self, test_client):
        response = test_client.post(
            "/api/v1/expressions/prove-eq",
            json={"expression": "{η | μ ν = η | μ ν}ᵀ", "tol": 0},
        )
        assert response.status_code == 422


class TestSpeciesEndpoints:
    """Tests de /api/v1/species."""

    def test_axioms(self, test_client):
        response = test_client.get("/api/v1/species/complex-lorentz/axioms")
        assert response.status_code == 200
        data = response.json()
        assert data["species"] == "complex-lorentz"
        assert [c["color"] for c in data["colors"]] == ["upL", "downL", "upR", "downR", "up", "down"]

    def test_axioms_alias(self, test_client):
        response = test_client.get("/api/v1/species/unit/axioms", params={"tol": 1e-9})
        assert response.status_code == 200
        assert response.json()["tol"] == 1e-9

    def test_unknown_species_returns_404(self, test_client):
        response = test_client.get("/api/v1/species/real-lorentz/axioms")
        assert response.status_code == 404

    def test_non_positive_tolerance_returns_422(self, test_client):
        response = test_client.get("/api/v1/species/unit/axioms", params={"tol": -1})
        assert response.status_code == 422

    def test_constants(self, test_client):
        response = test_client.get("/api/v1/species/complex-lorentz/constants")
        assert response.status_code == 200
        constants = response.json()["constants"]
        assert len(constants) == 16
        assert constants["η'"]["signature"] == ["down", "down"]
        assert constants["pauliContr"]["signature"] == ["up", "upL", "upR"]
