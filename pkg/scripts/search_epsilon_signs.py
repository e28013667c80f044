"""
Recherche des conventions de signe de (εL, εL', εR, εR').

Essaie les 16 combinaisons et affiche, pour chacune, le résultat des axiomes
de l'espèce et de l'identité de contraction des matrices de Pauli.

    python scripts/search_epsilon_signs.py [--tol 1e-12] [--accepted-only]
"""

import argparse
import sys

from app.services.lorentz import EPSILON_SIGNS, search_epsilon_signs


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description="Conventions de signe des métriques spinorielles")
    parser.add_argument("--tol", type=float, default=None, help="tolérance des axiomes")
    parser.add_argument("--accepted-only", action="store_true", help="n'affiche que les combinaisons retenues")
    args = parser.parse_args(argv)

    candidates = search_epsilon_signs(args.tol)
    print("--- SIGNES (εL, εL', εR, εR') ---")
    for candidate in candidates:
        if args.accepted_only and not candidate.accepted:
            continue
        signs = " ".join(f"{s:+d}" for s in candidate.signs)
        marker = " <- défaut" if candidate.signs == EPSILON_SIGNS else ""
        print(
            f"  [{signs}] axiomes={'ok' if candidate.axioms_passed else 'FAIL'} "
            f"pauli={'ok' if candidate.pauli_identity_passed else 'FAIL'}{marker}"
        )
    accepted = [c for c in candidates if c.accepted]
    print(f"\n{len(accepted)} combinaison(s) retenue(s) sur {len(candidates)}")
    return 0 if accepted else 1


if __name__ == "__main__":
    sys.exit(main())
