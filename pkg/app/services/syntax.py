"""
Notation indicielle : lexer, parser, élaborateur et formateur.

Grammaire (de la priorité la plus faible à la plus forte) :

    top      := "{" equation "}ᵀ" [".tensor"]
    equation := sum ["=" sum]
    sum      := product { ("+" | "-") product }
    product  := unary { "⊗" unary }
    unary    := "-" unary | scalar "•ₜ" unary | NAME "•ₐ" unary | primary
    primary  := "(" sum ")" | NAME ["|" { index }]
    index    := NAME | NATURAL
    scalar   := NUMBER | NAME

Alias ASCII normalisés par le lexer : "}T" pour "}ᵀ", "(x)" et "@" pour "⊗",
"*." pour "•ₜ", "@." pour "•ₐ", "′" pour "'".
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Sequence, Union

from app.core.error_handler import (
    ArityError,
    DualityError,
    EnvironmentMissingError,
    FormatError,
    FreeIndexMismatchError,
    InvalidInputError,
    MultiplicityError,
    ParseError,
)
from app.core.logging import get_logger
from app.services import tree as tt
from app.services.species import GroupElement
from app.services.tensor import DenseTensor, Permutation, succ_above
from app.utils.validators import format_scalar, is_real

logger = get_logger(__name__)

Index = Union[str, int]


# === Arbre syntaxique ===

@dataclass(frozen=True)
class Atom:
    name: str
    indices: tuple[Index, ...] = ()
    offset: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Prod:
    left: SyntaxExpr
    right: SyntaxExpr


@dataclass(frozen=True)
class Add:
    left: SyntaxExpr
    right: SyntaxExpr


@dataclass(frozen=True)
class Smul:
    """Multiplication par un littéral numérique ou un scalaire nommé."""

    scalar: complex | str
    expr: SyntaxExpr
    offset: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Action:
    group: str
    expr: SyntaxExpr
    offset: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Neg:
    expr: SyntaxExpr


@dataclass(frozen=True)
class Eq:
    """Égalité ; uniquement à la racine."""

    left: SyntaxExpr
    right: SyntaxExpr


SyntaxExpr = Union[Atom, Prod, Add, Smul, Action, Neg, Eq]


@dataclass
class Environment:
    """
    Noms disponibles pour l'élaboration.

    Attributes:
        tensors: Valeurs des feuilles par nom.
        scalars: Scalaires utilisables avec •ₜ.
        groups: Éléments de groupe utilisables avec •ₐ.
        variables: Noms de tenseurs traités comme feuilles variables.
    """

    tensors: dict[str, DenseTensor] = field(default_factory=dict)
    scalars: dict[str, complex] = field(default_factory=dict)
    groups: dict[str, GroupElement] = field(default_factory=dict)
    variables: set[str] = field(default_factory=set)

    def __post_init__(self) -> None:
        clash = (
            (self.tensors.keys() & self.scalars.keys())
            | (self.tensors.keys() & self.groups.keys())
            | (self.scalars.keys() & self.groups.keys())
        )
        if clash:
            raise InvalidInputError(
                f"Noms liés plusieurs fois dans l'environnement: {sorted(clash)}",
                details={"names": sorted(clash)}
            )

    def tensor(self, name: str) -> DenseTensor:
        try:
            return self.tensors[name]
        except KeyError:
            raise EnvironmentMissingError(name, "tenseur") from None

    def scalar(self, name: str) -> complex:
        try:
            return self.scalars[name]
        except KeyError:
            raise EnvironmentMissingError(name, "scalaire") from None

    def group(self, name: str) -> GroupElement:
        try:
            return self.groups[name]
        except KeyError:
            raise EnvironmentMissingError(name, "élément de groupe") from None

    def bind(self, name: str, tensor: DenseTensor, variable: bool = False) -> Environment:
        """Copie de l'environnement avec un tenseur supplémentaire (ou remplacé)."""
        variables = (self.variables | {name}) if variable else (self.variables - {name})
        return Environment(
            tensors={**self.tensors, name: tensor},
            scalars=dict(self.scalars),
            groups=dict(self.groups),
            variables=variables,
        )

    def merged(self, other: Environment) -> Environment:
        """Union des deux environnements ; other l'emporte sur les noms communs."""
        return Environment(
            tensors={**self.tensors, **other.tensors},
            scalars={**self.scalars, **other.scalars},
            groups={**self.groups, **other.groups},
            variables=self.variables | other.variables,
        )


# === Lexer ===

@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    offset: int


_TOKEN_SPEC = [
    ("WS", r"\s+"),
    ("CLOSE", r"\}(?:ᵀ|T)"),
    ("RBRACE", r"\}"),
    ("DOT_TENSOR", r"\.tensor\b"),
    ("LBRACE", r"\{"),
    ("OTIMES", r"⊗|\(x\)|@(?!\.)"),
    ("SMUL", r"•ₜ|\*\."),
    ("ACT", r"•ₐ|@\."),
    ("LPAREN", r"\("),
    ("RPAREN", r"\)"),
    ("BAR", r"\|"),
    ("PLUS", r"\+"),
    ("MINUS", r"-|−"),
    ("EQ", r"="),
    ("NUMBER", r"\d+(?:\.\d+)?(?:[eE][+-]?\d+)?"),
    ("NAME", r"[^\W\d][\w'′]*"),
]

_TOKEN_RE = re.compile("|".join(f"(?P<{kind}>{pattern})" for kind, pattern in _TOKEN_SPEC))


def _byte_offset(text: str, index: int) -> int:
    return len(text[:index].encode("utf-8"))


def tokenize(text: str) -> list[Token]:
    """
    Découpe le texte en jetons (offsets en octets UTF-8).

    Raises:
        ParseError: sur un caractère non reconnu.
    """
    tokens: list[Token] = []
    position = 0
    while position < len(text):
        match = _TOKEN_RE.match(text, position)
        if match is None:
            raise ParseError(f"Caractère inattendu '{text[position]}'", _byte_offset(text, position), text)
        kind = match.lastgroup
        if kind != "WS":
            lexeme = match.group()
            if kind == "NAME":
                lexeme = lexeme.replace("′", "'")
            tokens.append(Token(kind, lexeme, _byte_offset(text, position)))
        position = match.end()
    tokens.append(Token("EOF", "", _byte_offset(text, len(text))))
    return tokens


# === Parser ===

class _Parser:
    """Descente récursive sur la liste de jetons."""

    def __init__(self, text: str):
        self.text = text
        self.tokens = tokenize(text)
        self.pos = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.pos]

    def peek(self, ahead: int = 1) -> Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def advance(self) -> Token:
        token = self.current
        self.pos += 1
        return token

    def error(self, message: str, token: Token | None = None) -> ParseError:
        token = token or self.current
        return ParseError(message, token.offset, self.text)

    def expect(self, kind: str, what: str) -> Token:
        if self.current.kind != kind:
            found = self.current.text or "fin de l'entrée"
            raise self.error(f"{what} attendu, trouvé '{found}'")
        return self.advance()

    def parse_top(self) -> SyntaxExpr:
        self.expect("LBRACE", "'{'")
        expr = self.parse_equation()
        if self.current.kind == "RPAREN":
            raise self.error("Parenthèse fermante sans ouvrante")
        if self.current.kind == "RBRACE":
            raise self.error("Marqueur 'ᵀ' manquant après '}'")
        if self.current.kind != "CLOSE":
            if self.current.kind == "EOF":
                raise self.error("Accolade non fermée ou marqueur 'ᵀ' manquant")
            raise self.error(f"Jeton inattendu '{self.current.text}'")
        self.advance()
        if self.current.kind == "DOT_TENSOR":
            self.advance()
        if self.current.kind != "EOF":
            raise self.error(f"Texte après la fin de l'expression: '{self.current.text}'")
        return expr

    def parse_equation(self) -> SyntaxExpr:
        left = self.parse_sum()
        if self.current.kind == "EQ":
            self.advance()
            right = self.parse_sum()
            if self.current.kind == "EQ":
                raise self.error("Une seule égalité est permise")
            return Eq(left, right)
        return left

    def parse_sum(self) -> SyntaxExpr:
        expr = self.parse_product()
        while self.current.kind in ("PLUS", "MINUS"):
            op = self.advance()
            right = self.parse_product()
            expr = Add(expr, right) if op.kind == "PLUS" else Add(expr, Neg(right))
        return expr

    def parse_product(self) -> SyntaxExpr:
        expr = self.parse_unary()
        while self.current.kind == "OTIMES":
            self.advance()
            expr = Prod(expr, self.parse_unary())
        return expr

    def parse_unary(self) -> SyntaxExpr:
        token = self.current
        if token.kind == "MINUS":
            self.advance()
            return Neg(self.parse_unary())
        if token.kind == "NUMBER" and self.peek().kind == "SMUL":
            self.advance()
            self.advance()
            return Smul(complex(float(token.text)), self.parse_unary(), token.offset)
        if token.kind == "NAME" and self.peek().kind == "SMUL":
            self.advance()
            self.advance()
            return Smul(token.text, self.parse_unary(), token.offset)
        if token.kind == "NAME" and self.peek().kind == "ACT":
            self.advance()
            self.advance()
            return Action(token.text, self.parse_unary(), token.offset)
        return self.parse_primary()

    def parse_primary(self) -> SyntaxExpr:
        token = self.current
        if token.kind == "LPAREN":
            self.advance()
            expr = self.parse_sum()
            self.expect("RPAREN", "')'")
            return expr
        if token.kind == "NAME":
            self.advance()
            indices: list[Index] = []
            if self.current.kind == "BAR":
                self.advance()
                while self.current.kind in ("NAME", "NUMBER"):
                    index = self.advance()
                    if index.kind == "NUMBER":
                        if not index.text.isdigit():
                            raise self.error(f"Indice numérique non entier '{index.text}'", index)
                        indices.append(int(index.text))
                    else:
                        indices.append(index.text)
            return Atom(token.text, tuple(indices), token.offset)
        if token.kind == "NUMBER":
            raise self.error(f"Nombre '{token.text}' sans '•ₜ'")
        found = token.text or "fin de l'entrée"
        raise self.error(f"Expression attendue, trouvé '{found}'")


def parse(text: str) -> SyntaxExpr:
    """
    Analyse une expression en notation indicielle.

    Args:
        text: Expression entourée de { … }ᵀ.

    Returns:
        L'arbre syntaxique.

    Raises:
        ParseError: erreur lexicale ou syntaxique, avec position en octets.
    """
    return _Parser(text).parse_top()


# === Élaboration ===

@dataclass(frozen=True)
class _Elaborated:
    """Arbre élaboré et symboles de ses indices libres, dans l'ordre des positions."""

    tree: tt.TensorTree
    symbols: tuple[str, ...]


def _resolve_pairs(result: _Elaborated) -> _Elaborated:
    """Contracte les symboles répétés, dans l'ordre de leur première occurrence."""
    tree, symbols = result.tree, list(result.symbols)
    for symbol in dict.fromkeys(symbols):
        count = symbols.count(symbol)
        if count > 2:
            raise MultiplicityError(symbol, count)
    while True:
        repeated = next((s for s in dict.fromkeys(symbols) if symbols.count(s) == 2), None)
        if repeated is None:
            return _Elaborated(tree, tuple(symbols))
        p = symbols.index(repeated)
        q = symbols.index(repeated, p + 1)
        cp, cq = tree.signature[p], tree.signature[q]
        if tree.species.dual(cp) != cq:
            raise DualityError(
                f"Indice '{repeated}': couleurs {cp} et {cq} non duales",
                details={"symbol": repeated, "colors": [cp, cq], "positions": [p, q]}
            )
        tree = tt.Contr(p, q - 1, tree)
        del symbols[q]
        del symbols[p]


def _elaborate_atom(atom: Atom, env: Environment) -> _Elaborated:
    tensor = env.tensor(atom.name)
    if len(atom.indices) != tensor.rank:
        raise ArityError(atom.name, tensor.rank, len(atom.indices))
    tree: tt.TensorTree = tt.TensorNode(tensor, atom.name, variable=atom.name in env.variables)
    symbols: list[str] = []
    position = 0
    for index in atom.indices:
        if isinstance(index, int):
            tree = tt.Eval(position, index, tree)
        else:
            symbols.append(index)
            position += 1
    return _resolve_pairs(_Elaborated(tree, tuple(symbols)))


def _elaborate_chain(expr: SyntaxExpr, env: Environment) -> _Elaborated:
    """Produit d'une chaîne ⊗ sans résoudre les paires entre facteurs."""
    if isinstance(expr, Prod):
        left = _elaborate_chain(expr.left, env)
        right = _elaborate_chain(expr.right, env)
        return _Elaborated(tt.Prod(left.tree, right.tree), left.symbols + right.symbols)
    return _elaborate(expr, env)


def _align(left: _Elaborated, right: _Elaborated, operator: str) -> tt.Perm:
    """Permutation ramenant les indices libres de droite dans l'ordre de gauche."""
    if sorted(left.symbols) != sorted(right.symbols):
        raise FreeIndexMismatchError(
            f"Indices libres différents de part et d'autre de '{operator}': "
            f"{list(left.symbols)} / {list(right.symbols)}",
            details={"left": list(left.symbols), "right": list(right.symbols)}
        )
    mapping = tuple(left.symbols.index(s) for s in right.symbols)
    for i, symbol in enumerate(right.symbols):
        lc, rc = left.tree.signature[mapping[i]], right.tree.signature[i]
        if lc != rc:
            raise FreeIndexMismatchError(
                f"Indice '{symbol}' de couleur {lc} à gauche et {rc} à droite de '{operator}'",
                details={"symbol": symbol, "left": lc, "right": rc}
            )
    return tt.Perm(Permutation(right.tree.signature, left.tree.signature, mapping), right.tree)


def _elaborate(expr: SyntaxExpr, env: Environment) -> _Elaborated:
    match expr:
        case Atom():
            return _elaborate_atom(expr, env)
        case Prod():
            return _resolve_pairs(_elaborate_chain(expr, env))
        case Add(left=l, right=r):
            left, right = _elaborate(l, env), _elaborate(r, env)
            return _Elaborated(tt.Add(left.tree, _align(left, right, "+")), left.symbols)
        case Neg(expr=e):
            inner = _elaborate(e, env)
            return _Elaborated(tt.Neg(inner.tree), inner.symbols)
        case Smul(scalar=s, expr=e):
            value = env.scalar(s) if isinstance(s, str) else complex(s)
            inner = _elaborate(e, env)
            return _Elaborated(tt.Smul(value, inner.tree), inner.symbols)
        case Action(group=g, expr=e):
            element = env.group(g)
            inner = _elaborate(e, env)
            return _Elaborated(tt.Action(element, inner.tree, g), inner.symbols)
        case Eq():
            raise InvalidInputError("Égalité imbriquée dans une expression")
    raise InvalidInputError(f"Expression inconnue: {type(expr).__name__}")


def elaborate(
    expr: SyntaxExpr,
    env: Environment,
) -> tt.TensorTree | tuple[tt.TensorTree, tt.TensorTree]:
    """
    Traduit l'arbre syntaxique en arbre de tenseurs.

    Les indices numériques deviennent des noeuds eval autour de la feuille ;
    les symboles répétés d'une même portée (atome ou chaîne ⊗) sont contractés ;
    le membre droit d'un + ou d'un = est réordonné par un noeud perm.

    Returns:
        Un arbre, ou le couple (gauche, droite) pour une égalité.

    Raises:
        ArityError, DualityError, MultiplicityError, FreeIndexMismatchError,
        EnvironmentMissingError.
    """
    if isinstance(expr, Eq):
        left, right = _elaborate(expr.left, env), _elaborate(expr.right, env)
        return left.tree, _align(left, right, "=")
    return _elaborate(expr, env).tree


def elaborate_text(
    text: str,
    env: Environment,
) -> tt.TensorTree | tuple[tt.TensorTree, tt.TensorTree]:
    """parse puis elaborate, avec journalisation."""
    result = elaborate(parse(text), env)
    if isinstance(result, tuple):
        logger.debug("elaboration", expression=text, signature=list(result[0].signature), equation=True)
    else:
        logger.debug("elaboration", expression=text, signature=list(result.signature))
    return result


# === Formatage ===

class _Symbols:
    """Union-find sur les identifiants d'indices."""

    def __init__(self) -> None:
        self.parent: list[int] = []

    def fresh(self, count: int) -> list[int]:
        start = len(self.parent)
        self.parent.extend(range(start, start + count))
        return list(range(start, start + count))

    def find(self, x: int) -> int:
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


@dataclass
class _Rendered:
    """
    Texte en construction.

    parts mêle du texte et des identifiants d'indices ; positions suit les
    indices libres dans l'ordre de l'arbre, textual dans l'ordre que produirait
    la ré-élaboration.
    """

    parts: list[str | int]
    positions: list[int]
    textual: list[int]
    atomic: bool


def _is_sum(node: tt.TensorTree) -> bool:
    """Vrai si le texte du noeud est une somme au premier niveau (perm et contr n'ajoutent rien)."""
    while isinstance(node, (tt.Perm, tt.Contr)):
        node = node.child
    return isinstance(node, tt.Add)


class _Formatter:
    def __init__(self, env: Environment | None):
        self.env = env or Environment()
        self.symbols = _Symbols()

    def scalar_text(self, value: complex) -> str:
        if is_real(value):
            return format_scalar(value)
        for name, bound in self.env.scalars.items():
            if complex(bound) == complex(value):
                return name
        raise FormatError(
            f"Scalaire non réel {value} sans nom dans l'environnement",
            details={"scalar": str(value)}
        )

    def group_name(self, node: tt.Action) -> str:
        if node.name is not None and node.name in self.env.groups:
            return node.name
        for name, element in self.env.groups.items():
            if element.size == node.element.size and (element.matrix == node.element.matrix).all():
                return name
        if node.name is not None:
            return node.name
        raise FormatError("Élément de groupe anonyme", details={"node": "action"})

    def free_of_textual(self, rendered: _Rendered) -> list[int]:
        return [self.symbols.find(x) for x in rendered.textual]

    def leaf(self, node: tt.TensorTree) -> _Rendered:
        evals: list[tt.Eval] = []
        current = node
        while isinstance(current, tt.Eval):
            evals.append(current)
            current = current.child
        if not isinstance(current, tt.TensorNode):
            raise FormatError(
                "eval n'est exprimable que directement sur une feuille",
                details={"shape": tt.node_shape(node)}
            )
        if current.name is None:
            raise FormatError("Feuille anonyme: aucun nom à écrire", details={"node": "tensor"})
        slots: list[int | None] = [None] * len(current.signature)
        remaining = list(range(len(current.signature)))
        for ev in reversed(evals):
            slot = remaining.pop(ev.i)
            slots[slot] = -1 - ev.x
        ids = self.symbols.fresh(len(remaining))
        for slot, ident in zip(remaining, ids):
            slots[slot] = ident
        parts: list[str | int] = [current.name]
        if slots:
            parts.append(" |")
            for value in slots:
                parts.append(" ")
                parts.append(str(-1 - value) if value < 0 else value)
        return _Rendered(parts, list(ids), list(ids), atomic=True)

    def wrapped(self, rendered: _Rendered) -> list[str | int]:
        return rendered.parts if rendered.atomic else ["(", *rendered.parts, ")"]

    def render(self, node: tt.TensorTree) -> _Rendered:
        match node:
            case tt.TensorNode() | tt.Eval():
                return self.leaf(node)
            case tt.Neg(child=c):
                inner = self.render(c)
                return _Rendered(["-", *self.wrapped(inner)], inner.positions, inner.textual, atomic=False)
            case tt.Smul(scalar=a, child=c):
                inner = self.render(c)
                parts = [self.scalar_text(a), " •ₜ ", *self.wrapped(inner)]
                return _Rendered(parts, inner.positions, inner.textual, atomic=False)
            case tt.Action(child=c):
                inner = self.render(c)
                parts = [self.group_name(node), " •ₐ ", *self.wrapped(inner)]
                return _Rendered(parts, inner.positions, inner.textual, atomic=False)
            case tt.Perm(perm=p, child=c):
                inner = self.render(c)
                positions = [0] * len(inner.positions)
                for i, target in enumerate(p.mapping):
                    positions[target] = inner.positions[i]
                return _Rendered(inner.parts, positions, inner.textual, inner.atomic)
            case tt.Prod(left=l, right=r):
                left, right = self.render(l), self.render(r)
                left_parts = ["(", *left.parts, ")"] if _is_sum(l) else left.parts
                right_parts = ["(", *right.parts, ")"] if _is_sum(r) else right.parts
                return _Rendered(
                    [*left_parts, " ⊗ ", *right_parts],
                    left.positions + right.positions,
                    left.textual + right.textual,
                    atomic=False,
                )
            case tt.Contr(i=i, j=j, child=c):
                inner = self.render(c)
                k = succ_above(i, j)
                a, b = inner.positions[i], inner.positions[k]
                self.symbols.union(a, b)
                contracted = self.symbols.find(a)
                positions = [x for p, x in enumerate(inner.positions) if p not in (i, k)]
                textual = [x for x in inner.textual if self.symbols.find(x) != contracted]
                return _Rendered(inner.parts, positions, textual, inner.atomic)
            case tt.Add(left=l, right=r):
                left, right = self.render(l), self.render(r)
                for a, b in zip(left.positions, right.positions):
                    self.symbols.union(a, b)
                right_parts = ["(", *right.parts, ")"] if _is_sum(r) else right.parts
                return _Rendered(
                    [*left.parts, " + ", *right_parts],
                    left.positions,
                    left.textual,
                    atomic=False,
                )
        raise FormatError(f"Noeud non formatable: {type(node).__name__}")

    def check_root(self, rendered: _Rendered) -> None:
        positions = [self.symbols.find(x) for x in rendered.positions]
        if positions != self.free_of_textual(rendered):
            raise FormatError(
                "L'ordre des indices libres de la racine n'est pas exprimable en notation indicielle",
                details={"positions": positions, "textual": self.free_of_textual(rendered)}
            )

    def text(self, parts: Sequence[str | int]) -> str:
        names: dict[int, str] = {}
        out: list[str] = []
        for part in parts:
            if isinstance(part, int):
                root = self.symbols.find(part)
                if root not in names:
                    names[root] = f"i{len(names)}"
                out.append(names[root])
            else:
                out.append(part)
        return "{" + "".join(out) + "}ᵀ"


def format(tree: tt.TensorTree, env: Environment | None = None) -> str:
    """
    Écrit l'arbre en notation indicielle.

    Les symboles d'indices sont nommés i0, i1, … dans l'ordre d'apparition.
    Le texte produit se ré-élabore en un arbre de même sémantique.

    Raises:
        FormatError: feuille anonyme, eval sur un sous-arbre composé, scalaire
            non réel sans nom, ordre des indices libres non exprimable.
    """
    formatter = _Formatter(env)
    rendered = formatter.render(tree)
    formatter.check_root(rendered)
    return formatter.text(rendered.parts)


def format_equation(lhs: tt.TensorTree, rhs: tt.TensorTree, env: Environment | None = None) -> str:
    """Écrit lhs = rhs ; le membre droit est réaligné à l'élaboration."""
    formatter = _Formatter(env)
    left, right = formatter.render(lhs), formatter.render(rhs)
    if lhs.signature != rhs.signature:
        raise FormatError(
            "Membres de signatures différentes",
            details={"left": list(lhs.signature), "right": list(rhs.signature)}
        )
    for a, b in zip(left.positions, right.positions):
        formatter.symbols.union(a, b)
    formatter.check_root(left)
    return formatter.text([*left.parts, " = ", *right.parts])
