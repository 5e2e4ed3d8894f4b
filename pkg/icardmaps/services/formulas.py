"""
Modal formula service for icardmaps.
Handles the syntax of the provability language: parsing, printing,
negation normal form and the small structural measures used by reports.
"""
from dataclasses import dataclass
from functools import lru_cache, reduce
from typing import FrozenSet, Iterable, Union

from lark import Lark, Transformer, v_args

from icardmaps.services.ordinal_parser import run_parser


# ============ Syntax Tree ============


@dataclass(frozen=True)
class Top:
    pass


@dataclass(frozen=True)
class Bottom:
    pass


@dataclass(frozen=True)
class Var:
    index: int


@dataclass(frozen=True)
class Not:
    sub: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Implies:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Box:
    sub: "Formula"


@dataclass(frozen=True)
class Diamond:
    sub: "Formula"


Formula = Union[Top, Bottom, Var, Not, And, Or, Implies, Box, Diamond]

TOP = Top()
BOTTOM = Bottom()

_BINARY = {And: "&", Or: "|", Implies: "->"}
_UNARY = {Not: "~", Box: "[]", Diamond: "<>"}


# ============ Printing ============


@lru_cache(maxsize=1 << 14)
def to_text(phi: Formula) -> str:
    """Canonical text; binary connectives are parenthesized below the top level."""
    return _text(phi, top_level=True)


def _text(phi: Formula, top_level: bool = False) -> str:
    if isinstance(phi, Top):
        return "T"
    if isinstance(phi, Bottom):
        return "F"
    if isinstance(phi, Var):
        return f"p{phi.index}"
    if type(phi) in _UNARY:
        return _UNARY[type(phi)] + _text(phi.sub)
    body = f"{_text(phi.left)} {_BINARY[type(phi)]} {_text(phi.right)}"
    return body if top_level else f"({body})"


# ============ Parsing ============

FORMULA_GRAMMAR = r"""
    ?start: implication

    ?implication: disjunction
                | disjunction "->" implication   -> implies

    ?disjunction: conjunction
                | disjunction "|" conjunction    -> disj

    ?conjunction: unary
                | conjunction "&" unary          -> conj

    ?unary: "~" unary                            -> neg
          | "[]" unary                           -> box
          | "<>" unary                           -> diamond
          | atom

    ?atom: "T"                                   -> top
         | "F"                                   -> bottom
         | VAR                                   -> var
         | "(" implication ")"

    VAR: /p[0-9]+/

    %import common.WS
    %ignore WS
"""


@v_args(inline=True)
class _FormulaTransformer(Transformer):
    def top(self) -> Formula:
        return TOP

    def bottom(self) -> Formula:
        return BOTTOM

    def var(self, token) -> Formula:
        return Var(int(token[1:]))

    def neg(self, sub):
        return Not(sub)

    def box(self, sub):
        return Box(sub)

    def diamond(self, sub):
        return Diamond(sub)

    def conj(self, left, right):
        return And(left, right)

    def disj(self, left, right):
        return Or(left, right)

    def implies(self, left, right):
        return Implies(left, right)


_formula_parser = Lark(FORMULA_GRAMMAR, parser="lalr", transformer=_FormulaTransformer())


def parse_formula(text: str) -> Formula:
    """
    Parse a modal formula.

    Precedence is unary > & > | > ->, with -> associating to the right.
    """
    return run_parser(_formula_parser, text, "formula")


# ============ Constructors ============


def conjunction(formulas: Iterable[Formula]) -> Formula:
    items = list(formulas)
    if not items:
        return TOP
    return reduce(And, items)


def diamond_power(n: int) -> Formula:
    """<>^n T."""
    phi: Formula = TOP
    for _ in range(n):
        phi = Diamond(phi)
    return phi


def box_power(n: int, phi: Formula) -> Formula:
    for _ in range(n):
        phi = Box(phi)
    return phi


def diamond_tower_height(phi: Formula):
    """n when phi is <>^n T, otherwise None."""
    height = 0
    while isinstance(phi, Diamond):
        phi, height = phi.sub, height + 1
    return height if isinstance(phi, Top) else None


# ============ Normal Form and Measures ============


def nnf(phi: Formula, negate: bool = False) -> Formula:
    """Negation normal form of phi (or of ~phi when negate is set)."""
    if isinstance(phi, Top):
        return BOTTOM if negate else TOP
    if isinstance(phi, Bottom):
        return TOP if negate else BOTTOM
    if isinstance(phi, Var):
        return Not(phi) if negate else phi
    if isinstance(phi, Not):
        return nnf(phi.sub, not negate)
    if isinstance(phi, And):
        left, right = nnf(phi.left, negate), nnf(phi.right, negate)
        return Or(left, right) if negate else And(left, right)
    if isinstance(phi, Or):
        left, right = nnf(phi.left, negate), nnf(phi.right, negate)
        return And(left, right) if negate else Or(left, right)
    if isinstance(phi, Implies):
        if negate:
            return And(nnf(phi.left), nnf(phi.right, True))
        return Or(nnf(phi.left, True), nnf(phi.right))
    if isinstance(phi, Box):
        return Diamond(nnf(phi.sub, True)) if negate else Box(nnf(phi.sub))
    if isinstance(phi, Diamond):
        return Box(nnf(phi.sub, True)) if negate else Diamond(nnf(phi.sub))
    raise TypeError(f"not a formula: {phi!r}")


def modal_depth(phi: Formula) -> int:
    if isinstance(phi, (Top, Bottom, Var)):
        return 0
    if isinstance(phi, (Box, Diamond)):
        return 1 + modal_depth(phi.sub)
    if isinstance(phi, Not):
        return modal_depth(phi.sub)
    return max(modal_depth(phi.left), modal_depth(phi.right))


def variables(phi: Formula) -> FrozenSet[int]:
    if isinstance(phi, Var):
        return frozenset({phi.index})
    if isinstance(phi, (Top, Bottom)):
        return frozenset()
    if isinstance(phi, (Not, Box, Diamond)):
        return variables(phi.sub)
    return variables(phi.left) | variables(phi.right)


def size(phi: Formula) -> int:
    """Number of connectives."""
    if isinstance(phi, (Top, Bottom, Var)):
        return 0
    if isinstance(phi, (Not, Box, Diamond)):
        return 1 + size(phi.sub)
    return 1 + size(phi.left) + size(phi.right)
