"""
Configuration centralisée pour TensorIndex.

Utilise Pydantic Settings pour une validation stricte des variables d'environnement.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Literal

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


SPECIES_ALIASES = {
    "complex-lorentz": "complex-lorentz",
    "complex_lorentz": "complex-lorentz",
    "complexlorentz": "complex-lorentz",
    "lorentz": "complex-lorentz",
    "unit": "unit",
    "unit-species": "unit",
    "unit_species": "unit",
    "unit-test-species": "unit",
}


class Settings(BaseSettings):
    """
    Configuration de l'application TensorIndex.

    Toutes les variables sont chargées depuis l'environnement ou un fichier .env.
    Aucun secret n'est requis : chaque champ a une valeur par défaut.
    """

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    # === Application ===
    app_name: str = Field(default="TensorIndex", description="Nom de l'application")
    app_env: Literal["development", "staging", "production"] = Field(
        default="development",
        description="Environnement d'exécution"
    )
    debug: bool = Field(default=False, description="Mode debug")
    api_host: str = Field(default="0.0.0.0", description="Host de l'API")
    api_port: int = Field(default=8000, ge=1, le=65535, description="Port de l'API")

    # === Logging ===
    log_level: Literal["DEBUG", "INFO", "WARNING", "ERROR"] = Field(
        default="WARNING",
        description="Niveau de log (stderr)"
    )
    log_format: Literal["console", "json"] = Field(
        default="console",
        description="Rendu structlog: console lisible ou JSON"
    )

    # === Espèces ===
    default_species: Literal["complex-lorentz", "unit"] = Field(
        default="complex-lorentz",
        description="Espèce utilisée quand --species est absent"
    )

    # === Tolérances numériques ===
    invariance_tol: float = Field(
        default=1e-10,
        gt=0,
        description="Tolérance des vérifications d'invariance et d'égalité"
    )
    combinatorial_tol: float = Field(
        default=1e-12,
        gt=0,
        description="Tolérance des identités purement combinatoires (axiomes)"
    )

    # === Réécriture et comparaison ===
    numeric_samples: int = Field(
        default=20,
        ge=1,
        description="Nombre d'instanciations aléatoires des feuilles variables"
    )
    random_seed: int | None = Field(
        default=None,
        description="Graine des générateurs aléatoires (reproductibilité)"
    )
    normalize_max_steps: int = Field(
        default=10_000,
        ge=1,
        description="Garde-fou sur le nombre d'étapes de normalisation"
    )

    # === Selftest ===
    selftest_cases: int = Field(default=200, ge=1, description="Cas par règle (espèce unité)")
    selftest_lorentz_cases: int = Field(
        default=50,
        ge=1,
        description="Cas par règle (espèce complex-lorentz)"
    )
    selftest_workers: int = Field(default=4, ge=1, le=64, description="Threads du selftest")

    @field_validator("default_species", mode="before")
    @classmethod
    def normalize_species(cls, v: str) -> str:
        """Normalise les alias d'espèce (complex_lorentz, lorentz, unit-species...)."""
        if isinstance(v, str):
            return SPECIES_ALIASES.get(v.strip().lower(), v)
        return v

    @field_validator("log_level", mode="before")
    @classmethod
    def upper_log_level(cls, v: str) -> str:
        """Accepte les niveaux en minuscules."""
        return v.upper() if isinstance(v, str) else v


@lru_cache
def get_settings() -> Settings:
    """
    Retourne une instance singleton des settings.

    Utilise lru_cache pour éviter de recharger les settings à chaque appel.
    """
    return Settings()


# Instance globale pour import direct
settings = get_settings()
