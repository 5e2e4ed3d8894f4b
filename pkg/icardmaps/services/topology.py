"""
Icard topology service for icardmaps.
Handles lambda-ranks, generalized intervals (a, b]_level, basic
neighborhoods B_r(x) and their constructive shrinking, and the canonical
sequences converging to e^lambda(Theta+1).

The underlying space is always an ordinal with the left topology, so the
rank of a point is the point itself and the lambda-rank is l^lambda.
"""
import logging
from dataclasses import dataclass
from typing import Iterator, Mapping, Optional, Tuple

from lark import v_args

from icardmaps.services import ordinals
from icardmaps.services.errors import InternalConsistencyError, OrdinalDomainError, ParseError
from icardmaps.services.ordinal_parser import OrdinalTransformer, build_parser, run_parser
from icardmaps.services.ordinals import OrdTerm, Ordering3, compare

logger = logging.getLogger(__name__)


# ============ Types ============


@dataclass(frozen=True)
class IcardInterval:
    """(lower, upper]_level; lower None stands for the -1 sentinel."""

    lower: Optional[OrdTerm]
    upper: OrdTerm
    level: OrdTerm

    def __post_init__(self):
        if self.lower is not None and compare(self.lower, self.upper) is not Ordering3.LESS:
            raise OrdinalDomainError(f"empty interval: {self.lower} >= {self.upper}")

    def __str__(self) -> str:
        if self.lower is None:
            return f"[0, {self.upper}]_{self.level}"
        return f"({self.lower}, {self.upper}]_{self.level}"


@dataclass(frozen=True)
class SimpleFn:
    """Finite map from levels to thresholds."""

    entries: Tuple[Tuple[OrdTerm, OrdTerm], ...] = ()

    def __post_init__(self):
        levels = [level for level, _ in self.entries]
        if len(set(levels)) != len(levels):
            raise OrdinalDomainError("simple function has a repeated level")

    @classmethod
    def from_mapping(cls, mapping: Mapping[OrdTerm, OrdTerm]) -> "SimpleFn":
        return cls(tuple(sorted(mapping.items(), key=lambda item: item[0])))

    def __iter__(self) -> Iterator[Tuple[OrdTerm, OrdTerm]]:
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def levels(self) -> Tuple[OrdTerm, ...]:
        return tuple(level for level, _ in self.entries)


@dataclass(frozen=True)
class BasicNbhd:
    center: OrdTerm
    r: SimpleFn

    def __post_init__(self):
        for level, threshold in self.r:
            if compare(threshold, rank_lambda(level, self.center)) is not Ordering3.LESS:
                raise OrdinalDomainError(
                    f"B_r undefined at {self.center}: r({level}) = {threshold} is not below its {level}-rank"
                )


@dataclass(frozen=True)
class ShrunkNbhd:
    eta: OrdTerm
    gamma: OrdTerm
    interval: IcardInterval


# ============ Ranks and Membership ============


def rank_lambda(lam: OrdTerm, xi: OrdTerm) -> OrdTerm:
    """Rank of xi in the lambda-th Icard topology on an ordinal."""
    return ordinals.hyper_log(lam, xi)


def interval_member(xi: OrdTerm, iv: IcardInterval) -> bool:
    value = rank_lambda(iv.level, xi)
    if iv.lower is not None and compare(iv.lower, value) is not Ordering3.LESS:
        return False
    return compare(value, iv.upper) is not Ordering3.GREATER


def basic_nbhd_member(xi: OrdTerm, b: BasicNbhd) -> bool:
    if compare(xi, b.center) is Ordering3.GREATER:
        return False
    for level, threshold in b.r:
        value = rank_lambda(level, xi)
        if compare(threshold, value) is not Ordering3.LESS:
            return False
        if compare(value, rank_lambda(level, b.center)) is Ordering3.GREATER:
            return False
    return True


def check_sum_identity(lam: OrdTerm, mu: OrdTerm, xi: OrdTerm) -> bool:
    """Ranks compose: the (lam+mu)-rank is the mu-rank of the lam-rank."""
    return rank_lambda(ordinals.add(lam, mu), xi) == rank_lambda(mu, rank_lambda(lam, xi))


def displacement(alpha: OrdTerm, xi: OrdTerm) -> OrdTerm:
    """Translate xi in [alpha, alpha+beta] to -alpha+xi in [0, beta]."""
    return ordinals.left_subtract(alpha, xi)


# ============ Neighborhood Bases ============


def shrink_nbhd(lam: OrdTerm, theta: OrdTerm, r: SimpleFn) -> ShrunkNbhd:
    """
    Find an interval (eta, e^(w^b)Theta]_gamma around x = e^lam(Theta) inside B_r(x).

    Args:
        lam: Nonzero ordinal a + w^b
        theta: Nonzero ordinal
        r: Simple function with levels below lam, valid at x

    Returns:
        ShrunkNbhd with gamma = max({a} | dom r) and eta the least h
        with e^gamma(h) >= max e^level(r(level)); eta = 0 when r is empty.

    eta is log_ceil(gamma, v), not exp_ceil: the interval is open at eta, so
    every point in it already has gamma-log above eta and e^gamma(eta) = v
    is allowed. exp_ceil would overshoot by one (eta = 4 instead of 3 for
    lam = 1, Theta = 1, r = {0: 3}).
    """
    if not lam or not theta:
        raise OrdinalDomainError("shrink_nbhd needs lambda > 0 and Theta > 0")
    prefix, exponent = ordinals.split_lambda(lam)
    for level in r.levels():
        if compare(level, lam) is not Ordering3.LESS:
            raise OrdinalDomainError(f"level {level} is not below lambda = {lam}")
    center = ordinals.hyper_exp(lam, theta)
    BasicNbhd(center, r)

    gamma = ordinals.max_term(prefix, *r.levels())
    if len(r):
        bound = ordinals.max_term(*(ordinals.hyper_exp(level, threshold) for level, threshold in r))
        eta = ordinals.log_ceil(gamma, bound)
    else:
        eta = ordinals.ZERO
    upper = ordinals.hyper_exp(ordinals.omega_power(exponent), theta)
    if compare(eta, upper) is not Ordering3.LESS:
        logger.error("shrink_nbhd produced eta=%s above %s", eta, upper)
        raise InternalConsistencyError(f"shrink_nbhd: eta {eta} is not below {upper}")

    interval = IcardInterval(eta, upper, gamma)
    if not interval_member(center, interval):
        raise InternalConsistencyError(f"shrink_nbhd: center {center} escapes {interval}")
    logger.debug("shrink_nbhd(%s, %s) -> %s", lam, theta, interval)
    return ShrunkNbhd(eta=eta, gamma=gamma, interval=interval)


def converging_sequence(lam: OrdTerm, theta: OrdTerm, n: int) -> OrdTerm:
    """The n-th point of the canonical sequence lambda-converging to e^lam(Theta+1)."""
    if not lam:
        raise OrdinalDomainError("converging_sequence needs lambda > 0")
    prefix, exponent = ordinals.split_lambda(lam)
    if not exponent:
        return ordinals.hyper_exp(prefix, ordinals.times_nat(ordinals.omega_power(theta), n))
    core = ordinals.omega_power(exponent)
    start = ordinals.successor(ordinals.hyper_exp(core, theta))
    return ordinals.hyper_exp(prefix, ordinals.hyper_exp(ordinals.fund_seq(core, n), start))


# ============ Interval Syntax ============


@v_args(inline=True)
class _IntervalTransformer(OrdinalTransformer):
    def open_interval(self, lower, upper, level) -> IcardInterval:
        return IcardInterval(lower, upper, level)

    def closed_interval(self, lower, upper, level) -> IcardInterval:
        if lower:
            raise ParseError(f"closed intervals start at 0, got [{lower}, ...]")
        return IcardInterval(None, upper, level)


_INTERVAL_START = r"""
    ?start: interval
    ?interval: "(" expr "," expr "]" "_" expr    -> open_interval
             | "[" expr "," expr "]" "_" expr    -> closed_interval
"""

_interval_parser = build_parser(_INTERVAL_START, _IntervalTransformer())


def parse_interval(text: str) -> IcardInterval:
    """Parse "(A, B]_L" or "[0, B]_L"."""
    return run_parser(_interval_parser, text, "interval")
