"""
Ordinal term service for icardmaps.
Handles countable ordinals in hyperexponential normal form: comparison,
arithmetic, hyperexponentials e^a, hyperlogarithms l^a and the inverse
searches used by the topology and d-map services.

A term is a non-increasing sum of additively indecomposable summands, stored
as (summand, count) pairs with strictly decreasing summands. A summand is
either ONE or Exp(degree, mantissa) denoting e^degree(mantissa), where the
degree is at least 1 and the mantissa is 1 or additively decomposable.
Normal forms are unique, so == on terms is equality of ordinals.
"""
import enum
import logging
import random
from dataclasses import dataclass
from functools import lru_cache, total_ordering
from typing import NamedTuple, Optional, Tuple, Union

from icardmaps.services.errors import InternalConsistencyError, OrdinalDomainError

logger = logging.getLogger(__name__)


class Ordering3(enum.Enum):
    LESS = -1
    EQUAL = 0
    GREATER = 1

    def flip(self) -> "Ordering3":
        return Ordering3(-self.value)


# ============ Term Types ============


@dataclass(frozen=True)
class One:
    """The summand 1."""


@dataclass(frozen=True)
class Exp:
    """The summand e^degree(mantissa)."""

    degree: "OrdTerm"
    mantissa: "OrdTerm"


IndecTerm = Union[One, Exp]
ONE = One()


@total_ordering
@dataclass(frozen=True)
class OrdTerm:
    summands: Tuple[Tuple[IndecTerm, int], ...] = ()

    def __lt__(self, other: "OrdTerm") -> bool:
        if not isinstance(other, OrdTerm):
            return NotImplemented
        return compare(self, other) is Ordering3.LESS

    def __bool__(self) -> bool:
        return bool(self.summands)

    def __str__(self) -> str:
        return to_string(self)

    def __repr__(self) -> str:
        return f"OrdTerm({to_string(self)})"


ZERO = OrdTerm()
ONE_TERM = OrdTerm(((ONE, 1),))
OMEGA_SUMMAND = Exp(ONE_TERM, ONE_TERM)
OMEGA = OrdTerm(((OMEGA_SUMMAND, 1),))


def nat(n: int) -> OrdTerm:
    """The finite ordinal n."""
    if n < 0:
        raise OrdinalDomainError(f"negative natural {n}")
    return OrdTerm(((ONE, n),)) if n else ZERO


def single(summand: IndecTerm) -> OrdTerm:
    return OrdTerm(((summand, 1),))


def summand_count(x: OrdTerm) -> int:
    return sum(count for _, count in x.summands)


def leading(x: OrdTerm) -> IndecTerm:
    if not x:
        raise OrdinalDomainError("0 has no leading summand")
    return x.summands[0][0]


def last(x: OrdTerm) -> IndecTerm:
    if not x:
        raise OrdinalDomainError("0 has no last summand")
    return x.summands[-1][0]


def drop_last(x: OrdTerm) -> OrdTerm:
    """x with one copy of its last summand removed."""
    summand, count = x.summands[-1]
    if count > 1:
        return OrdTerm(x.summands[:-1] + ((summand, count - 1),))
    return OrdTerm(x.summands[:-1])


def is_decomposable(x: OrdTerm) -> bool:
    return summand_count(x) >= 2


def is_indecomposable(x: OrdTerm) -> bool:
    return summand_count(x) == 1


def is_finite(x: OrdTerm) -> bool:
    return all(isinstance(s, One) for s, _ in x.summands)


def to_int(x: OrdTerm) -> int:
    if not is_finite(x):
        raise OrdinalDomainError(f"{x} is not finite")
    return summand_count(x)


def is_successor(x: OrdTerm) -> bool:
    return bool(x) and isinstance(last(x), One)


def is_limit(x: OrdTerm) -> bool:
    return bool(x) and not isinstance(last(x), One)


# ============ Printing ============


def to_string(x: OrdTerm) -> str:
    """Canonical text: numerals for finite tails, summands repeated with '+'."""
    if not x:
        return "0"
    parts = []
    for summand, count in x.summands:
        if isinstance(summand, One):
            parts.append(str(count))
        else:
            parts.extend([_summand_string(summand)] * count)
    return "+".join(parts)


def _summand_string(summand: Exp) -> str:
    if summand.degree == ONE_TERM:
        if summand.mantissa == ONE_TERM:
            return "w"
        return f"w^({to_string(summand.mantissa)})"
    return f"e[{to_string(summand.degree)}]({to_string(summand.mantissa)})"


# ============ Order ============


def _compare_ints(m: int, n: int) -> Ordering3:
    if m == n:
        return Ordering3.EQUAL
    return Ordering3.LESS if m < n else Ordering3.GREATER


def compare(x: OrdTerm, y: OrdTerm) -> Ordering3:
    """Total order on terms, agreeing with the ordinal order."""
    for (a, m), (b, n) in zip(x.summands, y.summands):
        result = compare_summands(a, b)
        if result is not Ordering3.EQUAL:
            return result
        if m != n:
            return _compare_ints(m, n)
    return _compare_ints(len(x.summands), len(y.summands))


@lru_cache(maxsize=1 << 16)
def compare_summands(a: IndecTerm, b: IndecTerm) -> Ordering3:
    if a == b:
        return Ordering3.EQUAL
    if isinstance(a, One):
        return Ordering3.LESS
    if isinstance(b, One):
        return Ordering3.GREATER
    by_degree = compare(a.degree, b.degree)
    if by_degree is Ordering3.EQUAL:
        return compare(a.mantissa, b.mantissa)
    # strip the common e-prefix: e^a(m) vs e^a(e^c(n))
    if by_degree is Ordering3.LESS:
        rest = Exp(left_subtract(a.degree, b.degree), b.mantissa)
        return _mantissa_vs_summand(a.mantissa, rest)
    rest = Exp(left_subtract(b.degree, a.degree), a.mantissa)
    return _mantissa_vs_summand(b.mantissa, rest).flip()


def _mantissa_vs_summand(mantissa: OrdTerm, summand: Exp) -> Ordering3:
    # mantissa is 1 or decomposable, so it never equals an Exp summand
    if mantissa == ONE_TERM:
        return Ordering3.LESS
    if compare_summands(leading(mantissa), summand) is Ordering3.LESS:
        return Ordering3.LESS
    return Ordering3.GREATER


def max_term(*terms: OrdTerm) -> OrdTerm:
    result = ZERO
    for term in terms:
        if compare(term, result) is Ordering3.GREATER:
            result = term
    return result


# ============ Arithmetic ============


def add(x: OrdTerm, y: OrdTerm) -> OrdTerm:
    if not y:
        return x
    head, count = y.summands[0]
    kept = list(x.summands)
    while kept and compare_summands(kept[-1][0], head) is Ordering3.LESS:
        kept.pop()
    if kept and kept[-1][0] == head:
        merged = (head, kept[-1][1] + count)
        return OrdTerm(tuple(kept[:-1]) + (merged,) + y.summands[1:])
    return OrdTerm(tuple(kept) + y.summands)


def add_all(*terms: OrdTerm) -> OrdTerm:
    result = ZERO
    for term in terms:
        result = add(result, term)
    return result


def successor(x: OrdTerm) -> OrdTerm:
    return add(x, ONE_TERM)


def times_nat(x: OrdTerm, n: int) -> OrdTerm:
    """x*n, i.e. x added to itself n times."""
    if n < 0:
        raise OrdinalDomainError(f"negative multiplier {n}")
    if n == 0 or not x:
        return ZERO
    head, count = x.summands[0]
    return OrdTerm(((head, count * n),) + x.summands[1:])


def left_subtract(a: OrdTerm, b: OrdTerm) -> OrdTerm:
    """The unique g with a + g = b."""
    xs, ys = a.summands, b.summands
    for k, ((u, m), (v, n)) in enumerate(zip(xs, ys)):
        order = compare_summands(u, v)
        if order is Ordering3.EQUAL:
            if m == n:
                continue
            if m < n:
                return OrdTerm(((v, n - m),) + ys[k + 1:])
            break
        if order is Ordering3.LESS:
            return OrdTerm(ys[k:])
        break
    else:
        if len(xs) <= len(ys):
            return OrdTerm(ys[len(xs):])
    raise OrdinalDomainError(f"left_subtract: {a} > {b}")


def predecessor(x: OrdTerm) -> OrdTerm:
    if not is_successor(x):
        raise OrdinalDomainError(f"{x} is not a successor")
    return drop_last(x)


def finite_remainder(x: OrdTerm) -> int:
    """The k with x = a*w + k."""
    if is_successor(x):
        return x.summands[-1][1]
    return 0


def limit_part(x: OrdTerm) -> OrdTerm:
    """x minus its finite remainder."""
    if is_successor(x):
        return OrdTerm(x.summands[:-1])
    return x


# ============ Hyperexponentials and Logarithms ============


def hyper_exp(a: OrdTerm, x: OrdTerm) -> OrdTerm:
    """e^a(x) in normal form."""
    if not a:
        return x
    if not x:
        return ZERO
    if x == ONE_TERM or is_decomposable(x):
        return single(Exp(a, x))
    inner = leading(x)
    return single(Exp(add(a, inner.degree), inner.mantissa))


def omega_power(x: OrdTerm) -> OrdTerm:
    if not x:
        return ONE_TERM
    return hyper_exp(ONE_TERM, x)


def hyper_log(xi: OrdTerm, x: OrdTerm) -> OrdTerm:
    """l^xi(x); only the last summand of x matters, and l^xi(0) = 0."""
    while True:
        if not xi:
            return x
        if not x:
            return ZERO
        tail = last(x)
        if isinstance(tail, One):
            return ZERO
        degree, mantissa = tail.degree, tail.mantissa
        if compare(xi, degree) is not Ordering3.GREATER:
            return hyper_exp(left_subtract(xi, degree), mantissa)
        xi, x = left_subtract(degree, xi), mantissa


def end_log(x: OrdTerm) -> OrdTerm:
    return hyper_log(ONE_TERM, x)


def hnf_decompose(x: OrdTerm) -> Tuple[OrdTerm, OrdTerm]:
    """(degree, mantissa) with x = e^degree(mantissa); 1 decomposes as (0, 1)."""
    if not x:
        raise OrdinalDomainError("hnf_decompose(0) is undefined")
    if x == ONE_TERM or is_decomposable(x):
        return ZERO, x
    summand = leading(x)
    return summand.degree, summand.mantissa


def split_lambda(lam: OrdTerm) -> Tuple[OrdTerm, OrdTerm]:
    """Write lam = a + w^b and return (a, b)."""
    if not lam:
        raise OrdinalDomainError("0 has no end logarithm decomposition")
    return drop_last(lam), end_log(lam)


class OrdinalPredicates(NamedTuple):
    is_zero: bool
    is_successor: bool
    is_limit: bool
    is_add_indecomposable: bool
    is_mult_indecomposable: bool
    predecessor: Optional[OrdTerm]


def predicates(x: OrdTerm) -> OrdinalPredicates:
    indecomposable = is_indecomposable(x)
    # multiplicatively indecomposable: w^(w^r), i.e. w^b with b indecomposable
    mult = indecomposable and x != ONE_TERM and is_indecomposable(end_log(x))
    return OrdinalPredicates(
        is_zero=not x,
        is_successor=is_successor(x),
        is_limit=is_limit(x),
        is_add_indecomposable=indecomposable,
        is_mult_indecomposable=mult,
        predecessor=predecessor(x) if is_successor(x) else None,
    )


# ============ Fundamental Sequences ============


def fund_seq(x: OrdTerm, n: int) -> OrdTerm:
    """The n-th element of the canonical fundamental sequence of a limit x."""
    if not is_limit(x):
        raise OrdinalDomainError(f"fund_seq: {x} is not a limit")
    if n < 0:
        raise OrdinalDomainError(f"fund_seq: negative index {n}")
    return add(drop_last(x), _fund_seq_summand(last(x), n))


def _fund_seq_summand(summand: Exp, n: int) -> OrdTerm:
    degree, mantissa = summand.degree, summand.mantissa
    if degree == ONE_TERM:
        if is_successor(mantissa):
            return times_nat(omega_power(predecessor(mantissa)), n)
        return omega_power(fund_seq(mantissa, n))
    if is_finite(degree):
        exponent = hyper_exp(predecessor(degree), mantissa)
        return omega_power(fund_seq(exponent, n))
    if is_limit(mantissa):
        return hyper_exp(degree, fund_seq(mantissa, n))
    base = predecessor(mantissa)
    if is_limit(degree):
        return hyper_exp(fund_seq(degree, n), successor(hyper_exp(degree, base)))
    # e^(a+1)(m) = e^a(w^m)
    return hyper_exp(predecessor(degree), fund_seq(omega_power(mantissa), n))


# ============ Inverse Searches ============


def floor_exp(g: OrdTerm, v: OrdTerm) -> OrdTerm:
    """The largest h with e^g(h) <= v."""
    if not g:
        return v
    if not v:
        return ZERO
    return _floor_exp_summand(g, leading(v))


def _floor_exp_summand(g: OrdTerm, summand: IndecTerm) -> OrdTerm:
    if isinstance(summand, One):
        return ZERO
    degree, mantissa = summand.degree, summand.mantissa
    if compare(g, degree) is not Ordering3.GREATER:
        return hyper_exp(left_subtract(g, degree), mantissa)
    return floor_exp(left_subtract(degree, g), mantissa)


def exp_ceil(g: OrdTerm, v: OrdTerm) -> OrdTerm:
    """The least h with e^g(h) > v."""
    below = floor_exp(g, v)
    h = successor(below)
    if not (compare(hyper_exp(g, h), v) is Ordering3.GREATER
            and compare(hyper_exp(g, below), v) is not Ordering3.GREATER):
        logger.error("exp_ceil post-condition failed for g=%s v=%s", g, v)
        raise InternalConsistencyError(f"exp_ceil({g}, {v}) produced {h}")
    return h


def log_ceil(g: OrdTerm, v: OrdTerm) -> OrdTerm:
    """The least h with e^g(h) >= v."""
    below = floor_exp(g, v)
    if hyper_exp(g, below) == v:
        return below
    return successor(below)


class DegreeRange(NamedTuple):
    """A down-set of degrees: [0, sup] when attained, [0, sup) otherwise."""

    sup: OrdTerm
    attained: bool

    def contains(self, m: OrdTerm) -> bool:
        order = compare(m, self.sup)
        return order is Ordering3.LESS or (order is Ordering3.EQUAL and self.attained)

    def maximum(self) -> Optional[OrdTerm]:
        if self.attained:
            return self.sup
        if is_successor(self.sup):
            return predecessor(self.sup)
        return None


def _require_seed(s: OrdTerm) -> None:
    if not (s == ONE_TERM or is_decomposable(s)):
        raise OrdinalDomainError(f"degree search needs 1 or a decomposable seed, got {s}")


def _reaches_one(found: Optional[DegreeRange]) -> bool:
    return found is not None and found.contains(ONE_TERM)


def max_degree_below(s: OrdTerm, y: OrdTerm, strict: bool = False) -> Optional[DegreeRange]:
    """
    The set {m : e^m(s) <= y} (or < y when strict) as a DegreeRange.

    Args:
        s: Seed, 1 or additively decomposable
        y: Upper bound

    Returns:
        None when the set is empty.
    """
    _require_seed(s)
    if compare(s, y) is Ordering3.GREATER:
        return None
    found = _degree_range_summand(s, leading(y))
    result = found if _reaches_one(found) else DegreeRange(ZERO, True)
    if strict and result.attained and hyper_exp(result.sup, s) == y:
        if not result.sup:
            return None
        result = DegreeRange(result.sup, False)
    return result


def _degree_range_summand(t: OrdTerm, summand: IndecTerm) -> Optional[DegreeRange]:
    # {D : e^D(t) <= summand} for a seed t
    if isinstance(summand, One):
        return DegreeRange(ZERO, True) if t == ONE_TERM else None
    degree, mantissa = summand.degree, summand.mantissa
    if compare(t, mantissa) is not Ordering3.GREATER:
        tail = _degree_range_summand(t, leading(mantissa))
        if not _reaches_one(tail):
            return DegreeRange(degree, True)
        return DegreeRange(add(degree, tail.sup), tail.attained)
    # t > mantissa: D < degree with -D+degree >= c0, the least c with e^c(mantissa) > lead(t)
    below = _degree_range_summand(mantissa, leading(t))
    if below is None:
        c0 = ZERO
    else:
        c0 = successor(below.sup) if below.attained else below.sup
    if compare(c0, degree) is Ordering3.GREATER:
        return None
    if not c0:
        return DegreeRange(degree, False)
    return DegreeRange(_prefix_with_tail_at_least(degree, c0), False)


def _prefix_with_tail_at_least(a: OrdTerm, c0: OrdTerm) -> OrdTerm:
    # least P with -P+a >= c0 for every P' < P, searched from the smallest tails
    pairs = a.summands
    for k in range(len(pairs) - 1, -1, -1):
        summand, count = pairs[k]
        copies = _least_copies(summand, count, OrdTerm(pairs[k + 1:]), c0)
        if copies is not None:
            return OrdTerm(pairs[:k] + ((summand, count - copies + 1),))
    raise InternalConsistencyError(f"no tail of {a} reaches {c0}")


def _least_copies(summand: IndecTerm, count: int, rest: OrdTerm, c0: OrdTerm) -> Optional[int]:
    head, q = c0.summands[0]
    order = compare_summands(head, summand)
    if order is Ordering3.LESS:
        return 1
    if order is Ordering3.GREATER:
        return None
    remainder = OrdTerm(c0.summands[1:])
    copies = q if compare(rest, remainder) is not Ordering3.LESS else q + 1
    return copies if copies <= count else None


def max_limit_exponent(s: OrdTerm, x: OrdTerm, bound: OrdTerm) -> OrdTerm:
    """The largest m <= bound, zero or a limit, with e^m(s) <= x."""
    found = max_degree_below(s, x)
    result = ZERO if found is None else _largest_limit_within(found, bound)
    if result:
        fits = compare(hyper_exp(result, s), x) is not Ordering3.GREATER
        step = add(result, OMEGA)
        maximal = (compare(step, bound) is Ordering3.GREATER
                   or compare(hyper_exp(step, s), x) is Ordering3.GREATER)
        if not (fits and maximal):
            logger.error("max_limit_exponent post-condition failed: s=%s x=%s bound=%s", s, x, bound)
            raise InternalConsistencyError(f"max_limit_exponent({s}, {x}, {bound}) produced {result}")
    return result


def _largest_limit_within(found: DegreeRange, bound: OrdTerm) -> OrdTerm:
    order = compare(bound, found.sup)
    if order is Ordering3.LESS or (order is Ordering3.EQUAL and found.attained):
        return limit_part(bound)
    if found.attained or is_successor(found.sup):
        return limit_part(found.sup)
    summand, count = found.sup.summands[-1]
    if summand == OMEGA_SUMMAND:
        return drop_last(found.sup)
    raise InternalConsistencyError(f"no largest limit exponent below {found.sup}")


# ============ Sampling ============


def random_ordinal_below(rng: random.Random, bound: OrdTerm, depth: int = 3) -> OrdTerm:
    """A pseudo-random ordinal < bound, reached by descending fundamental sequences."""
    if not bound:
        raise OrdinalDomainError("nothing lies below 0")
    if is_successor(bound):
        below = predecessor(bound)
        if depth <= 0 or not below or rng.random() < 0.4:
            return below
        return random_ordinal_below(rng, below, depth - 1)
    n = rng.randrange(0, 4)
    low = fund_seq(bound, n)
    if depth <= 0 or rng.random() < 0.3:
        return low
    gap = left_subtract(low, fund_seq(bound, n + 1))
    return add(low, random_ordinal_below(rng, gap, depth - 1))
