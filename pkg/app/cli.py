"""
Interface en ligne de commande de TensorIndex.

    python -m app parse "{T | μ ν ⊗ T2 | ν σ}ᵀ" --env T.json --env T2.json
    python -m app prove-eq "{pauliCo | ν α β ⊗ pauliContr | ν α' β' = 2 •ₜ εL | α α' ⊗ εR | β β'}ᵀ"
    python -m app axioms --species unit

Les résultats vont sur stdout, les logs et les erreurs sur stderr. Le code de
sortie dépend de la catégorie d'erreur (voir app.core.error_handler).
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence, TextIO

from app.core.config import settings
from app.core.error_handler import (
    AxiomFailureError,
    ErrorCategory,
    InvalidInputError,
    NotEqualError,
    TensorIndexError,
    error_handler,
    handle_exceptions,
)
from app.core.logging import configure_logging, get_logger
from app.models.files import TensorFile, read_environment_file, write_tensor_file
from app.models.reports import RuleSweepResult
from app.services.lorentz import SPECIES_NAME, lorentz_constants, lorentz_environment
from app.services.rewrite import RULES, check_equal, normalize_with_trace
from app.services.sampling import soundness_sweep
from app.services.species import TensorSpecies, UNIT_SPECIES, check_axioms, check_invariance, get_species
from app.services.syntax import Environment, elaborate_text
from app.services.tree import dump, semantics
from app.utils.validators import constant_filename

logger = get_logger(__name__)


@dataclass
class Session:
    """Espèce, environnement et options de sortie d'une invocation."""

    species: TensorSpecies
    env: Environment
    json_output: bool = False
    tol: float | None = None
    out: TextIO = field(default=sys.stdout)

    @classmethod
    def from_args(cls, args: argparse.Namespace, out: TextIO) -> Session:
        species = get_species(args.species or settings.default_species)
        env = lorentz_environment() if species.name == SPECIES_NAME else Environment()
        for path in args.env or []:
            env = env.merged(read_environment_file(path, species))
        return cls(species=species, env=env, json_output=args.json, tol=args.tol, out=out)

    def emit(self, text: str) -> None:
        print(text, file=self.out)

    def emit_json(self, payload) -> None:
        print(json.dumps(payload, ensure_ascii=False, indent=2), file=self.out)


def _single_tree(session: Session, expression: str):
    result = elaborate_text(expression, session.env)
    if isinstance(result, tuple):
        raise InvalidInputError("Cette commande attend une expression sans '='", details={"expression": expression})
    return result


def cmd_parse(session: Session, args: argparse.Namespace) -> int:
    result = elaborate_text(args.expression, session.env)
    if isinstance(result, tuple):
        lhs, rhs = result
        text = f"(eq {dump(lhs)} {dump(rhs)})"
        payload = {"lhs": dump(lhs), "rhs": dump(rhs)}
    else:
        text = dump(result)
        payload = {"tree": text, "signature": list(result.signature)}
    if session.json_output:
        session.emit_json(payload)
    else:
        session.emit(text)
    return 0


def cmd_eval(session: Session, args: argparse.Namespace) -> int:
    tensor = semantics(_single_tree(session, args.expression))
    session.emit(TensorFile.from_tensor(tensor, args.name).model_dump_json(indent=2, exclude_none=True))
    return 0


def cmd_simplify(session: Session, args: argparse.Namespace) -> int:
    result, steps = normalize_with_trace(_single_tree(session, args.expression), trace=args.trace)
    if session.json_output:
        session.emit_json({"tree": dump(result), "steps": [s.model_dump() for s in steps]})
        return 0
    for step in steps:
        session.emit(step.to_text())
    session.emit(dump(result))
    return 0


def cmd_prove_eq(session: Session, args: argparse.Namespace) -> int:
    result = elaborate_text(args.expression, session.env)
    if not isinstance(result, tuple):
        raise InvalidInputError("prove-eq attend une égalité 'A = B'", details={"expression": args.expression})
    lhs, rhs = result
    verdict = check_equal(lhs, rhs, tol=session.tol, samples=args.samples, seed=args.seed)
    if not session.json_output:
        session.emit(verdict.to_text())
    elif verdict.is_equal:
        session.emit_json(verdict.model_dump())
    if not verdict.is_equal:
        raise NotEqualError(verdict.to_text(), details=verdict.model_dump())
    return 0


def cmd_axioms(session: Session, args: argparse.Namespace) -> int:
    report = check_axioms(session.species, session.tol)
    invariance = None
    if args.invariance:
        invariance = check_invariance(session.species, samples=args.samples, tol=session.tol, seed=args.seed)
    if session.json_output:
        payload = {"axioms": report.model_dump()}
        if invariance is not None:
            payload["invariance"] = invariance.model_dump()
        session.emit_json(payload)
    else:
        session.emit(report.to_text())
        if invariance is not None:
            session.emit(invariance.to_text())
    if not report.all_passed:
        raise AxiomFailureError(report.species, report.failures())
    if invariance is not None and not invariance.all_passed:
        failures = [{"property": name, "deviation": invariance.deviations[name]}
                    for name, ok in invariance.passed.items() if not ok]
        raise AxiomFailureError(report.species, failures)
    return 0


def cmd_constants_dump(session: Session, args: argparse.Namespace) -> int:
    directory = Path(args.directory)
    directory.mkdir(parents=True, exist_ok=True)
    constants = lorentz_constants()
    written = []
    for name, tensor in constants.tensors.items():
        path = directory / constant_filename(name)
        write_tensor_file(path, tensor, name)
        written.append(str(path))
    logger.info("constantes_ecrites", directory=str(directory), count=len(written))
    if session.json_output:
        session.emit_json({"written": written})
    else:
        for path in written:
            session.emit(path)
    return 0


def run_selftest(
    cases: int,
    lorentz_cases: int,
    workers: int,
    seed: int | None = None,
    rules: Sequence[str] | None = None,
) -> list[RuleSweepResult]:
    """Balaye chaque règle sur l'espèce unité et l'espèce de Lorentz, en parallèle."""
    lorentz = get_species(SPECIES_NAME)
    jobs = []
    for index, rule in enumerate(rules or list(RULES)):
        base = None if seed is None else seed + 2 * index
        jobs.append((rule, UNIT_SPECIES, cases, base))
        jobs.append((rule, lorentz, lorentz_cases, None if base is None else base + 1))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [
            pool.submit(soundness_sweep, rule, species, n, None, job_seed)
            for rule, species, n, job_seed in jobs
        ]
        results = [f.result() for f in futures]
    logger.info("selftest_termine", jobs=len(results), failures=sum(not r.all_passed for r in results))
    return results


def cmd_selftest(session: Session, args: argparse.Namespace) -> int:
    results = run_selftest(
        cases=args.cases or settings.selftest_cases,
        lorentz_cases=args.lorentz_cases or settings.selftest_lorentz_cases,
        workers=args.workers or settings.selftest_workers,
        seed=args.seed if args.seed is not None else settings.random_seed,
        rules=args.rule or None,
    )
    failed = [r for r in results if not r.all_passed]
    if session.json_output:
        session.emit_json([r.model_dump() for r in results])
    else:
        for result in results:
            session.emit(result.to_text())
    if failed:
        raise TensorIndexError(
            f"{len(failed)} balayage(s) en échec",
            category=ErrorCategory.INTERNAL,
            details={"failed": [f"{r.rule}/{r.species}" for r in failed]},
        )
    return 0


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--species", default=None, help="complex-lorentz (défaut) ou unit")
    common.add_argument("--env", action="append", metavar="FILE", help="fichier JSON d'environnement (répétable)")
    common.add_argument("--tol", type=float, default=None, help="tolérance numérique")
    common.add_argument("--json", action="store_true", help="sortie JSON")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_options()
    parser = argparse.ArgumentParser(prog="tensorindex", description="Notation indicielle pour tenseurs.")
    parser.add_argument("--log-level", default=None, help="niveau de log (stderr)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", parents=[common], help="élabore et affiche l'arbre")
    p.add_argument("expression")
    p.set_defaults(handler=cmd_parse)

    p = sub.add_parser("eval", parents=[common], help="évalue l'expression en tenseur JSON")
    p.add_argument("expression")
    p.add_argument("--name", default=None, help="nom écrit dans le JSON")
    p.set_defaults(handler=cmd_eval)

    p = sub.add_parser("simplify", parents=[common], help="forme normale de l'arbre")
    p.add_argument("expression")
    p.add_argument("--trace", action="store_true", help="affiche les étapes de réécriture")
    p.set_defaults(handler=cmd_simplify)

    p = sub.add_parser("prove-eq", parents=[common], help="compare les deux membres d'une égalité")
    p.add_argument("expression")
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(handler=cmd_prove_eq)

    p = sub.add_parser("axioms", parents=[common], help="audit des axiomes de l'espèce")
    p.add_argument("--invariance", action="store_true", help="vérifie aussi l'invariance de la représentation")
    p.add_argument("--samples", type=int, default=50)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(handler=cmd_axioms)

    p = sub.add_parser("constants", help="constantes de Lorentz")
    constants_sub = p.add_subparsers(dest="action", required=True)
    dump_parser = constants_sub.add_parser("dump", parents=[common], help="écrit chaque constante en JSON")
    dump_parser.add_argument("directory")
    dump_parser.set_defaults(handler=cmd_constants_dump)

    p = sub.add_parser("selftest", parents=[common], help="balayage de correction des règles de réécriture")
    p.add_argument("--cases", type=int, default=None)
    p.add_argument("--lorentz-cases", type=int, default=None)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--rule", action="append", choices=sorted(RULES))
    p.set_defaults(handler=cmd_selftest)

    return parser


def report_error(error: Exception, json_output: bool, out: TextIO, err: TextIO, operation: str) -> int:
    """Écrit l'erreur (stderr, et stdout en JSON) et retourne le code de sortie."""
    data = error_handler.handle_error(error, operation)
    print(f"error[{data['category']}]: {data['message']}", file=err)
    if json_output:
        payload = {key: data[key] for key in ("status", "category", "message", "details")}
        payload["details"] = {k: v for k, v in payload["details"].items() if k != "traceback"}
        print(json.dumps(payload, ensure_ascii=False, default=str), file=out)
    return data["exit_code"]


def main(argv: Sequence[str] | None = None, out: TextIO | None = None, err: TextIO | None = None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.log_level:
        configure_logging(level=args.log_level, force=True)

    json_output = getattr(args, "json", False)
    operation = args.command

    @handle_exceptions(operation)
    def execute() -> int:
        session = Session.from_args(args, out)
        return args.handler(session, args)

    try:
        return execute()
    except TensorIndexError as e:
        return report_error(e, json_output, out, err, operation)


if __name__ == "__main__":
    sys.exit(main())
