"""
Utilitaires pour TensorIndex.

Modules:
- validators: Noms d'indices, de constantes et de fichiers
"""
