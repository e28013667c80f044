"""
Tests pour TensorIndex.

Structure:
- test_species.py: Espèces et axiomes
- test_tensor.py: Noyaux denses (comparaisons avec des boucles naïves)
- test_tree.py: Arbres de tenseurs
- test_rewrite.py: Règles, normalisation, comparaison
- test_syntax.py: Parser, élaborateur, formateur
- test_lorentz.py: Espèce de Lorentz
- test_sampling.py: Générateurs aléatoires et selftest
- test_cli.py: Ligne de commande
- test_api.py: API HTTP
- test_acceptance.py: Scénarios de bout en bout
- conftest.py: Fixtures pytest partagées
"""
