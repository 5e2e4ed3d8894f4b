import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from icardmaps.services import ordinals
from icardmaps.services.errors import OrdinalDomainError, ParseError
from icardmaps.services.ordinal_parser import parse_ordinal as o
from icardmaps.services.ordinals import OMEGA, ZERO, Ordering3, compare, nat

ordinal_terms = st.recursive(
    st.integers(0, 3).map(nat),
    lambda children: st.one_of(
        st.tuples(children, children).map(lambda pair: ordinals.add(*pair)),
        st.tuples(children, children).map(lambda pair: ordinals.hyper_exp(*pair)),
    ),
    max_leaves=6,
)
nonzero_terms = ordinal_terms.filter(bool)


# ============ Parsing and printing ============


@pytest.mark.parametrize(
    "text, expected",
    [
        ("0", "0"),
        ("3", "3"),
        ("e[0](w)", "w"),
        ("w^(1)+1+w", "w+w"),
        ("e[1](2)", "w^(2)"),
        ("w^(w)", "e[2](1)"),
        ("w*3+2", "w+w+w+2"),
        ("e[w](w^(2)*3)", "e[w](w^(2)+w^(2)+w^(2))"),
    ],
)
def test_parse_normalizes(text, expected):
    assert str(o(text)) == expected


def test_iterated_exponentials_merge_degrees():
    assert o("e[1](e[1](1))") == o("e[2](1)")
    assert o("e[1](e[1](1))") == o("w^(w)")


@pytest.mark.parametrize("text", ["", "w^", "e[1]", "e[1](", "1++2", "x"])
def test_parse_rejects_bad_syntax(text):
    with pytest.raises(ParseError):
        o(text)


@given(ordinal_terms)
@settings(max_examples=300, deadline=None)
def test_printed_form_parses_back(x):
    assert o(str(x)) == x


# ============ Comparison and addition ============


@pytest.mark.parametrize(
    "x, y, expected",
    [
        ("w", "w+1", Ordering3.LESS),
        ("w^(2)", "w+w+w", Ordering3.GREATER),
        ("e[w](1)", "w^(w^(w))", Ordering3.GREATER),
        ("e[1](e[1](1))", "e[2](1)", Ordering3.EQUAL),
        ("0", "1", Ordering3.LESS),
    ],
)
def test_compare_examples(x, y, expected):
    assert compare(o(x), o(y)) is expected


def test_add_absorbs_smaller_summands():
    assert str(ordinals.add(o("w^(2)"), o("w+1"))) == "w^(2)+w+1"
    assert ordinals.add(o("1"), OMEGA) == OMEGA
    assert ordinals.add(o("w+5"), o("w^(2)")) == o("w^(2)")


def test_left_subtract():
    assert ordinals.left_subtract(OMEGA, o("w+5")) == nat(5)
    assert ordinals.left_subtract(nat(1), OMEGA) == OMEGA
    assert ordinals.left_subtract(ZERO, o("w^(2)")) == o("w^(2)")
    with pytest.raises(OrdinalDomainError):
        ordinals.left_subtract(o("w+1"), OMEGA)


def _cnf(coefficients):
    """w^3*c3 + w^2*c2 + w*c1 + c0 from (c3, c2, c1, c0)."""
    terms = [
        ordinals.times_nat(ordinals.omega_power(nat(3 - position)), count)
        for position, count in enumerate(coefficients)
    ]
    return ordinals.add_all(*terms)


def _cnf_add(a, b):
    nonzero = [position for position, count in enumerate(b) if count]
    if not nonzero:
        return a
    top = nonzero[0]
    return a[:top] + (a[top] + b[top],) + b[top + 1:]


def _cnf_end_log(a):
    for exponent, count in zip(range(4), reversed(a)):
        if count:
            return exponent
    return 0


class TestCantorNormalFormOracle:
    """Ordinals below w^4 against a coefficient-tuple model."""

    small = list(itertools.product(range(3), repeat=4))

    def test_compare_matches_lexicographic_order(self):
        rng = random.Random(7)
        values = list(itertools.product(range(5), repeat=4))
        for _ in range(12000):
            a, b = rng.choice(values), rng.choice(values)
            expected = Ordering3.LESS if a < b else Ordering3.GREATER if a > b else Ordering3.EQUAL
            assert compare(_cnf(a), _cnf(b)) is expected

    def test_add_matches_coefficient_model(self):
        for a, b in itertools.product(self.small, repeat=2):
            assert ordinals.add(_cnf(a), _cnf(b)) == _cnf(_cnf_add(a, b))

    def test_end_log_matches_lowest_exponent(self):
        for a in self.small:
            assert ordinals.end_log(_cnf(a)) == nat(_cnf_end_log(a))


# ============ Hyperexponentials and hyperlogarithms ============


def test_hyper_exp_examples():
    assert ordinals.hyper_exp(nat(1), nat(2)) == o("w^(2)")
    assert ordinals.hyper_exp(o("w"), ZERO) == ZERO
    assert str(ordinals.hyper_exp(OMEGA, nat(1))) == "e[w](1)"
    assert ordinals.omega_power(ZERO) == nat(1)
    assert ordinals.omega_power(nat(1)) == OMEGA


@pytest.mark.parametrize("mantissa", ["1", "2", "w", "w^(2)*3", "w+1"])
def test_epsilon_numbers_are_fixed_points(mantissa):
    x = ordinals.hyper_exp(OMEGA, o(mantissa))
    assert ordinals.omega_power(x) == x


@pytest.mark.parametrize("x, expected", [("w", "1"), ("w+1", "0"), ("1", "0"), ("w^(w)+w^(3)", "3"), ("0", "0")])
def test_end_log(x, expected):
    assert ordinals.end_log(o(x)) == o(expected)


def test_hyper_log_examples():
    x = o("e[w](w^(2)*3)")
    assert str(ordinals.hyper_log(OMEGA, x)) == "w^(2)+w^(2)+w^(2)"
    assert ordinals.hyper_log(o("w+1"), x) == nat(2)
    assert ordinals.hyper_log(o("w+2"), x) == ZERO
    assert ordinals.hyper_log(ZERO, x) == x


@given(ordinal_terms, ordinal_terms, ordinal_terms)
@settings(max_examples=1000, deadline=None)
def test_hyper_exp_composes(a, b, x):
    assert ordinals.hyper_exp(ordinals.add(a, b), x) == ordinals.hyper_exp(a, ordinals.hyper_exp(b, x))


@given(ordinal_terms, ordinal_terms)
@settings(max_examples=1000, deadline=None)
def test_hyper_log_cancels_hyper_exp(a, x):
    assert ordinals.hyper_log(a, ordinals.hyper_exp(a, x)) == x


@given(ordinal_terms, ordinal_terms, nonzero_terms)
@settings(max_examples=1000, deadline=None)
def test_exponential_cancellation(xi, zeta, x):
    if compare(xi, zeta) is Ordering3.GREATER:
        xi, zeta = zeta, xi
    expected = ordinals.hyper_exp(ordinals.left_subtract(xi, zeta), x)
    assert ordinals.hyper_log(xi, ordinals.hyper_exp(zeta, x)) == expected


@given(ordinal_terms, ordinal_terms, ordinal_terms)
@settings(max_examples=1000, deadline=None)
def test_hyper_log_composes(a, b, x):
    assert ordinals.hyper_log(ordinals.add(a, b), x) == ordinals.hyper_log(b, ordinals.hyper_log(a, x))


@given(nonzero_terms, ordinal_terms, nonzero_terms)
@settings(max_examples=500, deadline=None)
def test_hyper_log_only_sees_the_last_summand(xi, g, d):
    assert ordinals.hyper_log(xi, ordinals.add(g, d)) == ordinals.hyper_log(xi, d)


@pytest.mark.parametrize("xi", ["0", "1", "2", "w"])
@pytest.mark.parametrize("n", [0, 1, 2, 5])
def test_finite_degrees_stay_below_next_epsilon(xi, n):
    lower = ordinals.hyper_exp(nat(n), ordinals.add(ordinals.hyper_exp(OMEGA, o(xi)), nat(n + 1)))
    upper = ordinals.hyper_exp(OMEGA, ordinals.successor(o(xi)))
    assert compare(lower, upper) is Ordering3.LESS


@pytest.mark.parametrize("lam, gamma", [("w^(2)", "w"), ("w^(2)", "w*2"), ("w^(w)", "w^(2)"), ("w^(w)", "w*3")])
@given(xi=ordinal_terms, n=st.integers(0, 6))
@settings(max_examples=100, deadline=None)
def test_limit_stage_bound(lam, gamma, xi, n):
    # e^eta(e^lam(xi) + f(eta)) sits between e^eta(e^lam(xi) + 1) and e^gamma(e^lam(xi) + 1) for eta < gamma
    eta = ordinals.fund_seq(o(gamma), n)
    base = ordinals.hyper_exp(o(lam), xi)
    value = ordinals.hyper_exp(eta, ordinals.add(base, ordinals.successor(eta)))
    assert compare(ordinals.hyper_exp(eta, ordinals.successor(base)), value) is not Ordering3.GREATER
    assert compare(value, ordinals.hyper_exp(o(gamma), ordinals.successor(base))) is Ordering3.LESS


@pytest.mark.parametrize("lam", ["w", "w*2", "w^(2)", "w^(w)", "w^(2)+w"])
@given(xi=ordinal_terms)
@settings(max_examples=200, deadline=None)
def test_hyper_logs_settle_below_a_limit(lam, xi):
    prefix, exponent = ordinals.split_lambda(o(lam))
    core = ordinals.omega_power(exponent)
    expected = ordinals.hyper_exp(core, ordinals.hyper_log(o(lam), xi))
    for n in range(64, 68):
        zeta = ordinals.add(prefix, ordinals.fund_seq(core, n))
        assert ordinals.hyper_log(zeta, xi) == expected


# ============ Decompositions and predicates ============


@pytest.mark.parametrize(
    "x, degree, mantissa",
    [("e[w](1)", "w", "1"), ("w", "1", "1"), ("w+1", "0", "w+1"), ("1", "0", "1"), ("w^(w)", "2", "1")],
)
def test_hnf_decompose(x, degree, mantissa):
    assert ordinals.hnf_decompose(o(x)) == (o(degree), o(mantissa))


def test_hnf_decompose_rejects_zero():
    with pytest.raises(OrdinalDomainError):
        ordinals.hnf_decompose(ZERO)


def test_finite_remainder_and_limit_part():
    assert ordinals.finite_remainder(nat(5)) == 5
    assert ordinals.finite_remainder(o("w+3")) == 3
    assert ordinals.finite_remainder(o("w^(2)")) == 0
    assert ordinals.limit_part(o("w+3")) == OMEGA


def test_predicates():
    omega = ordinals.predicates(OMEGA)
    assert omega.is_limit and omega.is_add_indecomposable and omega.is_mult_indecomposable
    square = ordinals.predicates(o("w^(2)"))
    assert square.is_add_indecomposable and not square.is_mult_indecomposable
    succ = ordinals.predicates(o("w+1"))
    assert succ.is_successor and succ.predecessor == OMEGA
    assert ordinals.predicates(ZERO).is_zero


# ============ Fundamental sequences and bounds ============


@pytest.mark.parametrize("n", [0, 1, 3, 7])
def test_fund_seq_examples(n):
    assert ordinals.fund_seq(OMEGA, n) == nat(n)
    assert ordinals.fund_seq(o("w^(2)"), n) == ordinals.times_nat(OMEGA, n)
    assert ordinals.fund_seq(o("e[w](1)"), n) == ordinals.hyper_exp(nat(n), nat(1))


@pytest.mark.parametrize("x", ["w", "w^(2)", "w^(w)", "e[w](1)", "w^(2)+w", "e[w+1](1)", "e[2](w)"])
def test_fund_seq_increases_below_its_limit(x):
    limit = o(x)
    values = [ordinals.fund_seq(limit, n) for n in range(6)]
    for smaller, larger in zip(values, values[1:]):
        assert compare(smaller, larger) is Ordering3.LESS
    assert all(compare(value, limit) is Ordering3.LESS for value in values)


def test_exp_ceil_examples():
    assert ordinals.exp_ceil(nat(1), ZERO) == nat(1)
    assert ordinals.exp_ceil(nat(1), o("w+1")) == nat(2)
    assert ordinals.exp_ceil(nat(1), o("w^(w)+w+1")) == o("w+1")


def test_log_ceil_hits_exact_values():
    assert ordinals.log_ceil(ZERO, nat(3)) == nat(3)
    assert ordinals.log_ceil(ZERO, o("w^(w)")) == o("w^(w)")


def test_floor_exp_examples():
    assert ordinals.floor_exp(nat(1), o("w+1")) == nat(1)
    assert ordinals.floor_exp(nat(1), ZERO) == ZERO
    assert ordinals.floor_exp(ZERO, o("w+3")) == o("w+3")


@given(ordinal_terms, st.sampled_from(["1", "2", "w"]))
@settings(max_examples=150, deadline=None)
def test_floor_exp_brackets_the_value(v, degree):
    g = o(degree)
    below = ordinals.floor_exp(g, v)
    assert compare(ordinals.hyper_exp(g, below), v) is not Ordering3.GREATER
    assert compare(ordinals.hyper_exp(g, ordinals.successor(below)), v) is Ordering3.GREATER


def test_degree_range_at_a_fixed_point():
    found = ordinals.max_degree_below(nat(1), o("e[w](1)"))
    assert found == (OMEGA, True)
    strict = ordinals.max_degree_below(nat(1), o("e[w](1)"), strict=True)
    assert strict == (OMEGA, False)
    assert strict.maximum() is None
    assert ordinals.max_degree_below(nat(2), nat(1)) is None


def test_max_limit_exponent_examples():
    assert ordinals.max_limit_exponent(nat(2), o("w^(w)"), o("w^(5)")) == ZERO
    assert ordinals.max_limit_exponent(nat(2), o("e[w](1+1)"), o("w^(5)")) == OMEGA


@pytest.mark.parametrize("bound", ["1", "5", "w", "w+3", "w^(w)", "e[w](2)"])
def test_random_ordinal_below_respects_bound(bound):
    rng = random.Random(3)
    limit = o(bound)
    for _ in range(50):
        assert compare(ordinals.random_ordinal_below(rng, limit), limit) is Ordering3.LESS
