"""
TensorIndex - Notation indicielle pour tenseurs.

Parser, élaborateur, arbres de tenseurs, réécriture et espèce de Lorentz complexe.
"""

__version__ = "1.0.0"
__author__ = "TensorIndex Team"
