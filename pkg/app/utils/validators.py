"""
Utilitaires de validation et de normalisation pour TensorIndex.

Fonctions réutilisables pour les scalaires, les paires [re, im] des fichiers
JSON et les noms de fichiers des constantes.
"""

from __future__ import annotations

import re
from typing import Any

from app.core.error_handler import InvalidInputError


def format_scalar(value: complex) -> str:
    """
    Formate un scalaire pour les dumps d'arbres.

    Examples:
        >>> format_scalar(2)
        '2'
        >>> format_scalar(-0.5)
        '-0.5'
        >>> format_scalar(1 + 2j)
        '(1+2j)'
    """
    z = complex(value)
    if z.imag == 0:
        real = z.real
        if real.is_integer():
            return str(int(real))
        return repr(real)
    return repr(z)


def is_real(value: complex) -> bool:
    return complex(value).imag == 0


def parse_complex_pair(value: Any) -> complex:
    """
    Convertit [re, im] (ou un nombre réel) en complexe.

    Raises:
        InvalidInputError: si la valeur n'est ni un nombre ni une paire de nombres.
    """
    if isinstance(value, bool):
        raise InvalidInputError("Composante booléenne invalide", details={"value": value})
    if isinstance(value, (int, float)):
        return complex(float(value), 0.0)
    if isinstance(value, (list, tuple)) and len(value) == 2:
        re_part, im_part = value
        if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in (re_part, im_part)):
            return complex(float(re_part), float(im_part))
    raise InvalidInputError(
        "Composante attendue sous la forme [re, im]",
        details={"value": repr(value)[:80]}
    )


def complex_pair(value: complex) -> list[float]:
    z = complex(value)
    return [float(z.real), float(z.imag)]


_UNSAFE_FILENAME = re.compile(r"[^0-9A-Za-z_\-]")

_ASCII_NAMES = {
    "η": "eta",
    "ε": "eps",
    "δ": "delta",
}


def constant_filename(name: str) -> str:
    """
    Nom de fichier ASCII d'une constante.

    Examples:
        >>> constant_filename("η'")
        'eta_prime.json'
        >>> constant_filename("δ_upL")
        'delta_upL.json'
    """
    ascii_name = "".join(_ASCII_NAMES.get(ch, ch) for ch in name)
    ascii_name = ascii_name.replace("'", "_prime").replace("′", "_prime")
    return _UNSAFE_FILENAME.sub("_", ascii_name) + ".json"
