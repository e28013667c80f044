"""
Services métier pour TensorIndex.

Modules:
- species: Espèces de tenseurs, axiomes, invariance
- tensor: Tenseurs denses et noyaux numériques
- tree: Arbres de tenseurs et sémantique
- rewrite: Règles de réécriture, normalisation, comparaison
- syntax: Parser, élaborateur et formateur de la notation indicielle
- lorentz: Espèce de Lorentz complexe, constantes, bispineurs
- sampling: Arbres aléatoires et balayages de correction
"""
