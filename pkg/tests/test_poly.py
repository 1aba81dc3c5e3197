import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sosinterp.poly import (
    NEG_INF,
    PolyError,
    PolyParseError,
    Polynomial,
    VarEnv,
    monomial_basis,
    parse_poly,
)

ENV2 = VarEnv.of(["x", "y"])
ENV4 = VarEnv.of(["x", "y", "xp", "yp"])


def ref_mul(a, b):
    """Reference product on raw term dicts (independent of Polynomial.mul)."""
    out = {}
    for m1, c1 in a.items():
        for m2, c2 in b.items():
            m = tuple(u + v for u, v in zip(m1, m2))
            out[m] = out.get(m, 0.0) + c1 * c2
    return {m: c for m, c in out.items() if c != 0.0}


def test_parse_code_fragment():
    p = parse_poly("x^2 + y - 1", ENV4)
    assert p.terms == {(2, 0, 0, 0): 1.0, (0, 1, 0, 0): 1.0, (0, 0, 0, 0): -1.0}


def test_parse_zero():
    assert parse_poly("0", ENV2).terms == {}


def test_parse_square_matches_repeated_multiplication_oracle():
    # oracle: expand (x+y)^2 by one explicit reference multiplication
    base = {(1, 0): 1.0, (0, 1): 1.0}
    expected = ref_mul(base, base)
    got = parse_poly("(x+y)^2", ENV2)
    assert got.terms == expected


@pytest.mark.parametrize(
    "text,msg",
    [
        ("x + z", "unknown variable"),
        ("x ^ -2", "negative exponent"),
        ("x^1.5", "non-integer exponent"),
        ("x + ", "unexpected"),
        ("(x + y", "expected ')'"),
        ("2x", "unexpected"),  # juxtaposition is not a product
    ],
)
def test_parse_errors_carry_position(text, msg):
    with pytest.raises(PolyParseError) as err:
        parse_poly(text, ENV2)
    assert msg in str(err.value)
    assert "position" in str(err.value)


def test_mul_difference_of_squares():
    x = Polynomial.variable(ENV2, "x")
    y = Polynomial.variable(ENV2, "y")
    assert (x + y) * (x - y) == x * x - y * y


def test_mul_gram_coefficient_example():
    # f = a20*x1^2, g = b00 with a20=1, b00=2: coefficient of x1^2 in f*g is 2
    env = VarEnv.of(["x1", "x2"])
    f = parse_poly("x1^2", env)
    g = parse_poly("2", env)
    assert (f * g).coeff((2, 0)) == 2.0


def test_mul_by_zero_absorbs():
    p = parse_poly("x^2 + 3*y", ENV2)
    assert (p * Polynomial.zero(ENV2)).is_zero()


def test_mul_env_mismatch():
    with pytest.raises(PolyError):
        parse_poly("x", ENV2) * parse_poly("x", ENV4)


def test_substitute_transition_equation_vanishes():
    f1 = parse_poly("x^2 + y - 1 - xp", ENV4)
    got = f1.substitute({"xp": parse_poly("x^2 + y - 1", ENV4)})
    assert got.is_zero()


def test_substitute_constant():
    p = parse_poly("x*y", ENV2)
    assert p.substitute({"x": Polynomial.constant(ENV2, 2.0)}) == parse_poly("2*y", ENV2)


def test_substitute_expansion_oracle():
    # (xp)^2 with xp -> x + 1 equals the reference expansion of (x+1)^2
    env = VarEnv.of(["x", "xp"])
    p = parse_poly("xp^2", env)
    got = p.substitute({"xp": parse_poly("x + 1", env)})
    expected = ref_mul({(1, 0): 1.0, (0, 0): 1.0}, {(1, 0): 1.0, (0, 0): 1.0})
    assert got.terms == expected


def test_substitute_identity_is_exact():
    rng = random.Random(4)
    for _ in range(50):
        p = random_poly(rng, ENV2, deg=3)
        assert p.substitute({"x": Polynomial.variable(ENV2, "x")}) == p


def test_substitute_unknown_variable():
    with pytest.raises(PolyError):
        parse_poly("x", ENV2).substitute({"zz": Polynomial.constant(ENV2, 1.0)})


def test_monomial_basis_small():
    env = VarEnv.of(["x1", "x2"])
    basis = monomial_basis(env, 1)
    assert basis.monomials == ((0, 0), (1, 0), (0, 1))


def test_monomial_basis_counts():
    assert len(monomial_basis(ENV2, 2)) == 6
    env4 = VarEnv.of(["a", "b", "c", "d"])
    assert len(monomial_basis(env4, 2)) == 15  # binomial(6, 4)


def test_monomial_basis_counts_match_binomial_up_to_8():
    # independent oracle: enumerate exponent tuples by brute force
    for n in range(1, 9):
        env = VarEnv.of([f"v{i}" for i in range(n)])
        for d in range(0, 9):
            count = _brute_count(n, d)
            basis = monomial_basis(env, d)
            assert len(basis) == count == math.comb(n + d, n)
            assert basis.monomials[0] == (0,) * n


def _brute_count(n, d):
    def rec(i, left):
        if i == n - 1:
            return left + 1
        return sum(rec(i + 1, left - e) for e in range(left + 1))

    return rec(0, d)


def test_grlex_order_within_degree():
    env = VarEnv.of(["x", "y"])
    basis = monomial_basis(env, 2)
    assert basis.monomials == ((0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2))


def test_eval_simple():
    assert parse_poly("x^2 + y", ENV2).eval((2.0, 1.0)) == 5.0
    assert Polynomial.zero(ENV2).eval((3.0, -7.0)) == 0.0


def test_eval_reported_interpolant_value():
    env = VarEnv.of(["vc"])
    p = parse_poly("0 - 1.3983*vc + 69.358", env)
    assert p.eval((49.0,)) == pytest.approx(0.8413, abs=1e-10)


def test_eval_dimension_mismatch():
    with pytest.raises(PolyError):
        parse_poly("x", ENV2).eval((1.0,))


def test_degree_sentinel():
    assert Polynomial.zero(ENV2).degree() == NEG_INF
    assert parse_poly("x*y + 1", ENV2).degree() == 2


def random_poly(rng, env, deg=4, terms=6):
    out = {}
    for _ in range(terms):
        mono = [0] * len(env)
        for _ in range(rng.randint(0, deg)):
            mono[rng.randrange(len(env))] += 1
        if sum(mono) > deg:
            continue
        out[tuple(mono)] = rng.randint(-8, 8) / 4.0
    return Polynomial(env, out)


def test_ring_axioms_randomized():
    # exact coefficient equality on dyadic coefficients, >= 10^3 trials
    rng = random.Random(12345)
    env = VarEnv.of(["a", "b", "c", "d"])
    for _ in range(1100):
        p = random_poly(rng, env)
        q = random_poly(rng, env)
        r = random_poly(rng, env)
        assert p + q == q + p
        assert p * q == q * p
        assert (p + q) + r == p + (q + r)
    rng = random.Random(999)
    for _ in range(300):
        # associativity/distributivity on small-degree inputs (kept exact)
        p = random_poly(rng, env, deg=2, terms=3)
        q = random_poly(rng, env, deg=2, terms=3)
        r = random_poly(rng, env, deg=2, terms=3)
        assert (p * q) * r == p * (q * r)
        assert p * (q + r) == p * q + p * r


def test_eval_is_ring_homomorphism():
    rng = random.Random(77)
    env = VarEnv.of(["a", "b", "c"])
    for _ in range(300):
        p = random_poly(rng, env, deg=3)
        q = random_poly(rng, env, deg=3)
        point = tuple(rng.uniform(-2, 2) for _ in env.names)
        lhs = (p * q).eval(point)
        rhs = p.eval(point) * q.eval(point)
        assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-9)


@given(
    st.lists(
        st.tuples(
            st.tuples(st.integers(0, 3), st.integers(0, 3)),
            st.integers(-16, 16).map(lambda v: v / 2.0),
        ),
        max_size=8,
    )
)
@settings(max_examples=200, deadline=None)
def test_to_string_parse_round_trip(raw_terms):
    p = Polynomial(ENV2, dict(raw_terms))
    again = parse_poly(p.to_string(), ENV2)
    assert again == p


def test_pow_matches_repeated_mul():
    p = parse_poly("x + 2*y - 1", ENV2)
    by_mul = p * p * p
    assert p**3 == by_mul
    assert p**0 == Polynomial.constant(ENV2, 1.0)
    with pytest.raises(PolyError):
        p ** (-1)


def test_canonical_drops_noise_terms():
    p = Polynomial(ENV2, {(1, 0): 1e-13})
    assert p.is_zero()


def test_env_rejects_duplicates():
    with pytest.raises(PolyError):
        VarEnv.of(["x", "x"])
