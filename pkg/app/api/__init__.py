"""
API endpoints pour TensorIndex.

Modules:
- expressions: Élaboration, évaluation, normalisation et comparaison d'expressions
- species: Audit des axiomes et constantes de Lorentz
"""
