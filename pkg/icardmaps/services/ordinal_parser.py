"""
Ordinal expression parser for icardmaps.

Grammar (whitespace insignificant):
    expr := term ('+' term)*
    term := atom ('*' NAT)?
    atom := NAT | 'w' | 'w^(' expr ')' | 'e[' expr '](' expr ')' | '(' expr ')'
"""
from functools import reduce

from lark import Lark, Transformer, v_args
from lark.exceptions import UnexpectedCharacters, UnexpectedEOF, UnexpectedInput, UnexpectedToken, VisitError

from icardmaps.services import ordinals
from icardmaps.services.errors import IcardError, ParseError
from icardmaps.services.ordinals import OrdTerm

ORDINAL_RULES = r"""
    expr: term ("+" term)*
    term: atom ("*" NAT)?

    ?atom: NAT                              -> natural
         | "w"                              -> omega
         | "w" "^" "(" expr ")"             -> omega_power
         | "e" "[" expr "]" "(" expr ")"    -> hyperexp
         | "(" expr ")"

    NAT: /[0-9]+/

    %import common.WS
    %ignore WS
"""


@v_args(inline=True)
class OrdinalTransformer(Transformer):
    """Builds normalized terms bottom-up while the LALR parser reduces."""

    def natural(self, token) -> OrdTerm:
        return ordinals.nat(int(token))

    def omega(self) -> OrdTerm:
        return ordinals.OMEGA

    def omega_power(self, exponent: OrdTerm) -> OrdTerm:
        return ordinals.omega_power(exponent)

    def hyperexp(self, degree: OrdTerm, argument: OrdTerm) -> OrdTerm:
        return ordinals.hyper_exp(degree, argument)

    def term(self, atom: OrdTerm, count=None) -> OrdTerm:
        if count is None:
            return atom
        return ordinals.times_nat(atom, int(count))

    def expr(self, *terms: OrdTerm) -> OrdTerm:
        return reduce(ordinals.add, terms, ordinals.ZERO)


def build_parser(start_rules: str, transformer: Transformer) -> Lark:
    """LALR parser over the ordinal rules plus caller-supplied start rules."""
    return Lark(start_rules + ORDINAL_RULES, parser="lalr", transformer=transformer)


def run_parser(parser: Lark, text: str, what: str):
    """Parse text, translating lark failures into ParseError."""
    try:
        return parser.parse(text)
    except VisitError as exc:
        if isinstance(exc.orig_exc, IcardError):
            raise exc.orig_exc
        raise
    except UnexpectedEOF as exc:
        raise ParseError(f"unexpected end of {what}", text, expected=exc.expected) from exc
    except UnexpectedCharacters as exc:
        raise ParseError(
            f"unexpected character {exc.char!r} in {what}",
            text, exc.line, exc.column, exc.allowed or (),
        ) from exc
    except UnexpectedToken as exc:
        expected = exc.accepts or exc.expected
        if exc.token.type == "$END":
            raise ParseError(f"unexpected end of {what}", text, expected=expected) from exc
        raise ParseError(
            f"unexpected token {exc.token!s} in {what}", text, exc.line, exc.column, expected,
        ) from exc
    except UnexpectedInput as exc:
        raise ParseError(f"invalid {what}", text, getattr(exc, "line", None), getattr(exc, "column", None)) from exc


_ordinal_parser = build_parser("?start: expr\n", OrdinalTransformer())


def parse_ordinal(text: str) -> OrdTerm:
    """
    Parse an ordinal expression into its normal form.

    Args:
        text: Expression such as "e[w](w^(2)*3)+1"

    Returns:
        The normalized OrdTerm
    """
    return run_parser(_ordinal_parser, text, "ordinal expression")


def format_ordinal(x: OrdTerm) -> str:
    return ordinals.to_string(x)
