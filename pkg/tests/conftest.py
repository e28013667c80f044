"""
Configuration et fixtures pytest pour TensorIndex.

Fournit les espèces (Lorentz, unité, espèce mixte de test), un générateur
aléatoire, le client HTTP et un lanceur de CLI.
"""

import io
import os
from typing import Callable, Generator

import numpy as np
import pytest
from fastapi.testclient import TestClient

os.environ.setdefault("APP_ENV", "development")
os.environ.setdefault("LOG_LEVEL", "WARNING")
os.environ.setdefault("DEBUG", "false")


def _identity_representation(species_dims):
    def representation(c, g):
        return np.eye(species_dims[c], dtype=np.complex128)
    return representation


def build_mixed_species():
    """
    Espèce synthétique à dimensions 1, 2 et 4.

    - "a" : auto-duale, dimension 1
    - "s" : auto-duale, dimension 2, appariement K = [[0, 1], [1, 0]]
    - "v" / "w" : duales l'une de l'autre, dimension 4
    """
    from app.services.species import TensorSpecies, sample_phase

    dims = {"a": 1, "s": 2, "v": 4, "w": 4}
    swap = np.array([[0, 1], [1, 0]], dtype=np.complex128)
    eye = {c: np.eye(d, dtype=np.complex128) for c, d in dims.items()}
    return TensorSpecies(
        name="mixed",
        colors=("a", "s", "v", "w"),
        tau={"a": "a", "s": "s", "v": "w", "w": "v"},
        dims=dims,
        representation=_identity_representation(dims),
        contr_forms={**eye, "s": swap},
        units={**eye, "s": swap},
        metrics=eye,
        group_size=1,
        sampler=sample_phase,
    )


@pytest.fixture(scope="session")
def lorentz():
    """Espèce de Lorentz complexe."""
    from app.services.lorentz import build_species
    return build_species()


@pytest.fixture(scope="session")
def unit():
    """Espèce unité (une couleur de dimension 1)."""
    from app.services.species import UNIT_SPECIES
    return UNIT_SPECIES


@pytest.fixture(scope="session")
def mixed():
    """Espèce mixte de test."""
    return build_mixed_species()


@pytest.fixture
def rng() -> np.random.Generator:
    """Générateur déterministe."""
    return np.random.default_rng(20240917)


@pytest.fixture(scope="session")
def lorentz_env():
    """Environnement des constantes de Lorentz (alias ASCII inclus)."""
    from app.services.lorentz import lorentz_environment
    return lorentz_environment()


@pytest.fixture
def test_client() -> Generator[TestClient, None, None]:
    """
    Fixture pour le client de test FastAPI.

    Crée un client HTTP pour tester les endpoints.
    """
    from app.main import app
    with TestClient(app) as client:
        yield client


@pytest.fixture
def run_cli() -> Callable[..., tuple[int, str, str]]:
    """Lance la CLI en capturant stdout et stderr ; retourne (code, out, err)."""
    from app.cli import main

    def runner(*argv: str) -> tuple[int, str, str]:
        out, err = io.StringIO(), io.StringIO()
        code = main(list(argv), out=out, err=err)
        return code, out.getvalue(), err.getvalue()

    return runner


# === Markers personnalisés ===

def pytest_configure(config):
    """Configuration des markers pytest."""
    config.addinivalue_line(
        "markers", "slow: tests lents (balayages sur l'espèce de Lorentz)"
    )
    config.addinivalue_line(
        "markers", "oracle: comparaison avec une implémentation naïve par boucles"
    )
    config.addinivalue_line(
        "markers", "acceptance: identités physiques et scénarios de bout en bout"
    )
