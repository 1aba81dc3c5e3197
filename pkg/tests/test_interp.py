import itertools
from unittest import mock

import pytest

from sosinterp.interp import (
    ArchimedeanPreconditionError,
    InterpError,
    combine_interpolants,
    mult_monoid_power,
    rsn_interpolants,
    sn_interpolants,
    sn_interpolants_escalate,
    subset_products,
)
from sosinterp.poly import Polynomial, VarEnv, parse_poly
from sosinterp.sas import SAS, DefEquations
from sosinterp.validate import ValidationConfig, check_separation

ENV1 = VarEnv.of(["x"])
ENV3 = VarEnv.of(["x1", "x2", "x3"])


def P(text, env=ENV3):
    return parse_poly(text, env)


def test_subset_products_pair():
    f1, f2 = P("x1"), P("x2")
    out = subset_products([f1, f2])
    assert out == [f1, f2, f1 * f2]


def test_subset_products_empty():
    assert subset_products([]) == []


def test_subset_products_count_matches_powerset():
    fs = [P("x1"), P("x2 + 1"), P("x3 - 2")]
    out = subset_products(fs)
    assert len(out) == 7  # 2^3 - 1 non-empty subsets
    # brute-force oracle over itertools subsets
    expected = []
    for r in range(1, 4):
        for combo in itertools.combinations(range(3), r):
            prod = Polynomial.constant(ENV3, 1.0)
            for i in combo:
                prod = prod * fs[i]
            expected.append(prod)
    assert sorted(p.to_string() for p in out) == sorted(p.to_string() for p in expected)


def test_monoid_empty_is_one():
    assert mult_monoid_power([], 4, ENV3) == Polynomial.constant(ENV3, 1.0)


def test_monoid_power_single():
    x = parse_poly("x", ENV1)
    assert mult_monoid_power([x], 4) == parse_poly("x^4", ENV1)


def test_monoid_floors_to_one():
    # two linear disequalities: squared product has degree 4 > b = 2
    g1, g2 = P("x1 + x2 + x3"), P("2*x1 + 3*x2 - 4*x3")
    assert mult_monoid_power([g1, g2], 2) == Polynomial.constant(ENV3, 1.0)


def test_monoid_rejects_zero():
    with pytest.raises(InterpError):
        mult_monoid_power([Polynomial.zero(ENV1)], 2)


def simple_pair():
    t1 = SAS.of(ENV1, geqs=[parse_poly("x", ENV1)])
    t2 = SAS.of(ENV1, geqs=[parse_poly("0 - x - 1", ENV1)])
    return t1, t2


def test_sn_simple_pair_at_b0():
    t1, t2 = simple_pair()
    itp = sn_interpolants(t1, t2, DefEquations.empty(), 0)
    assert itp is not None
    assert itp.mode == "general"
    # validator-passing is the acceptance notion: q >= 1/2 on t1, <= -1/2 on t2
    rep = check_separation(itp, t1, t2, ValidationConfig(box={"x": (-3.0, 3.0)}))
    assert rep.verdict == "Pass"
    assert rep.t1.min_value >= 0.5 - 1e-6
    assert rep.t2.max_value <= -0.5 + 1e-6


def test_sn_rejects_odd_degree():
    t1, t2 = simple_pair()
    with pytest.raises(InterpError):
        sn_interpolants(t1, t2, DefEquations.empty(), 3)


def test_sn_interpolant_uses_only_live_variables():
    env = VarEnv.of(["x", "dead"])
    t1 = SAS.of(env, geqs=[parse_poly("x", env)])
    t2 = SAS.of(env, geqs=[parse_poly("0 - x - 1", env)])
    itp = sn_interpolants(t1, t2, DefEquations.empty(), 2, shared=("dead",))
    assert itp is not None
    assert "dead" not in itp.q.variables()


def test_sn_product_generator_separates_quadrant_from_hyperbola():
    # With the subset product x1*x2 available as a cone generator, the pair
    # {x1 >= 0, x2 >= 0} vs {-x1x2 - 1 >= 0} has the exact hand certificate
    # 1 + 2*(x1x2) + 2*(-x1x2 - 1) + 1 == 0 and a valid separator.
    env = VarEnv.of(["x1", "x2"])
    t1 = SAS.of(env, geqs=[parse_poly("x1", env), parse_poly("x2", env)])
    t2 = SAS.of(env, geqs=[parse_poly("0 - x1*x2 - 1", env)])
    itp = sn_interpolants(t1, t2, DefEquations.empty(), 0)
    assert itp is not None
    box = {"x1": (-3.0, 3.0), "x2": (-3.0, 3.0)}
    rep = check_separation(itp, t1, t2, ValidationConfig(box=box))
    assert rep.verdict == "Pass"


def test_sn_overlapping_pair_returns_null():
    # phi and psi share x = 0: no interpolant exists at any degree
    env = VarEnv.of(["x"])
    t1 = SAS.of(env, geqs=[parse_poly("x", env)])
    t2 = SAS.of(env, geqs=[parse_poly("0 - x", env)])
    for b in (0, 2, 4, 6):
        assert sn_interpolants(t1, t2, DefEquations.empty(), b) is None


def test_escalation_stops_at_first_success():
    t1, t2 = simple_pair()
    calls = []
    real = sn_interpolants

    def spy(t1_, t2_, defs_, b, cfg=None, shared=()):
        calls.append(b)
        return real(t1_, t2_, defs_, b, cfg, shared)

    with mock.patch("sosinterp.interp.sn_interpolants", side_effect=spy):
        itp = sn_interpolants_escalate(t1, t2, DefEquations.empty(), 0, 8)
    assert itp is not None
    assert calls == [0]  # never invoked at a larger b after success


def bounded_pair():
    psi = []
    for v in ENV3.names:
        psi.append(P(f"{v} + 2"))
        psi.append(P(f"2 - {v}"))
    t1 = SAS.of(ENV3, geqs=psi + [P("0 - x1^2 - 4*x2^2 - x3^2 + 2"),
                                  P("x1^2 - x2^2 - x1*x3 - 1")])
    t2 = SAS.of(ENV3, geqs=psi + [P("0 - x1^2 - 4*x2^2 - x3^2 + 3*x1*x2 + 0.2"),
                                  P("0 - x1^2 + x2^2 + x1*x3 + 1")])
    return t1, t2


def test_rsn_bounded_quartic_pair():
    t1, t2 = bounded_pair()
    itp = rsn_interpolants(t1, t2, DefEquations.empty(), 8)
    assert itp is not None
    assert itp.mode == "archimedean"
    assert itp.degree_bound == 2
    box = {v: (-2.0, 2.0) for v in ENV3.names}
    rep = check_separation(itp, t1, t2, ValidationConfig(box=box))
    assert rep.verdict in ("Pass", "MarginWarning")
    assert rep.t1.min_value > 0 and rep.t2.max_value < 0


def test_rsn_interval_pair():
    env = VarEnv.of(["x"])
    t1 = SAS.of(env, geqs=[parse_poly("x", env), parse_poly("2 - x", env)])
    t2 = SAS.of(env, geqs=[parse_poly("0 - x - 1", env), parse_poly("x + 2", env)])
    itp = rsn_interpolants(t1, t2, DefEquations.empty(), 4)
    assert itp is not None
    rep = check_separation(itp, t1, t2, ValidationConfig(box={"x": (-3.0, 3.0)}))
    assert rep.verdict in ("Pass", "MarginWarning")
    assert rep.t1.min_value > 0 and rep.t2.max_value < 0


def test_rsn_requires_bounds():
    # both constraints bound x from below only: no upper bound anywhere
    env = VarEnv.of(["x"])
    t1 = SAS.of(env, geqs=[parse_poly("x", env)])
    t2 = SAS.of(env, geqs=[parse_poly("x - 1", env)])
    with pytest.raises(ArchimedeanPreconditionError) as err:
        rsn_interpolants(t1, t2, DefEquations.empty(), 4)
    assert "x" in err.value.missing


def test_rsn_accepts_bounds_from_either_side():
    # the union of both systems' geqs supplies the bounds (syntactic check):
    # t1 gives x >= 0, t2 gives x <= -1, and the quadratic module certifies
    env = VarEnv.of(["x"])
    t1 = SAS.of(env, geqs=[parse_poly("x", env)])
    t2 = SAS.of(env, geqs=[parse_poly("0 - x - 1", env)])
    itp = rsn_interpolants(t1, t2, DefEquations.empty(), 4)
    assert itp is not None


def test_rsn_rejects_disequalities():
    env = VarEnv.of(["x"])
    t1 = SAS.of(env, geqs=[parse_poly("x", env), parse_poly("2 - x", env)],
                neqs=[parse_poly("x - 1", env)])
    t2 = SAS.of(env, geqs=[parse_poly("0 - x - 1", env), parse_poly("x + 2", env)])
    with pytest.raises(ArchimedeanPreconditionError):
        rsn_interpolants(t1, t2, DefEquations.empty(), 4)


def test_rsn_rewrites_equations_as_bound_pairs():
    env = VarEnv.of(["x", "y"])
    # y = x on the box; t1: x in [0, 2]; t2: x in [-2, -1]
    bounds = [parse_poly("x + 2", env), parse_poly("2 - x", env),
              parse_poly("y + 2", env), parse_poly("2 - y", env)]
    t1 = SAS.of(env, geqs=bounds + [parse_poly("x", env)],
                eqs=[parse_poly("x - y", env)])
    t2 = SAS.of(env, geqs=bounds + [parse_poly("0 - x - 1", env)])
    itp = rsn_interpolants(t1, t2, DefEquations.empty(), 4)
    assert itp is not None


def test_combine_single():
    t1, t2 = simple_pair()
    itp = sn_interpolants(t1, t2, DefEquations.empty(), 0)
    formula = combine_interpolants([[itp]])
    assert "or" not in formula.to_string()
    assert formula.matrix == ((itp,),)


def test_combine_two_by_two_shape():
    t1, t2 = simple_pair()
    itp = sn_interpolants(t1, t2, DefEquations.empty(), 0)
    formula = combine_interpolants([[itp, itp], [itp, itp]])
    text = formula.to_string()
    assert text.count(" or ") == 1
    assert text.count(" and ") == 2


def test_combine_rejects_incomplete():
    t1, t2 = simple_pair()
    itp = sn_interpolants(t1, t2, DefEquations.empty(), 0)
    with pytest.raises(InterpError):
        combine_interpolants([])
    with pytest.raises(InterpError):
        combine_interpolants([[itp, itp], [itp]])


def test_generator_cap():
    env = VarEnv.of(["x"])
    fs = [parse_poly("x", env) + float(i) for i in range(11)]
    with pytest.raises(InterpError):
        subset_products(fs)  # 2^11 - 1 = 2047 > 1024


def test_construction_margin_bound_on_samples():
    # q(a) >= 1/2 - |r(a)| - sum_i |q_i(a)| * eq_band on t1 samples, and the
    # mirrored bound on t2 samples (for equation-free systems this is just
    # q >= 1/2 - |r| and q <= -1/2 + |r|).
    from sosinterp.validate import sample_sas

    env = VarEnv.of(["x", "y"])
    t1 = SAS.of(env, geqs=[parse_poly("1 - x^2 - y^2", env)],
                eqs=[parse_poly("x - y", env)])
    t2 = SAS.of(env, geqs=[parse_poly("x + y - 3", env)])
    itp = sn_interpolants(t1, t2, DefEquations.empty(), 2)
    assert itp is not None
    r = itp.certificate.residual
    q_parts = itp.certificate.q
    box = {"x": (-4.0, 4.0), "y": (-4.0, 4.0)}
    eq_band = 1e-6
    pts1, _ = sample_sas(t1, 2000, 5, box, eq_band)
    pts2, _ = sample_sas(t2, 2000, 6, box, eq_band)
    assert len(pts1) and len(pts2)
    for a in pts1[:200]:
        slack = abs(r.eval(a)) + sum(abs(m.eval(a)) for m in q_parts) * eq_band
        assert itp.q.eval(a) >= 0.5 - slack - 1e-9
    for a in pts2[:200]:
        slack = abs(r.eval(a)) + sum(abs(m.eval(a)) for m in q_parts) * eq_band
        assert itp.q.eval(a) <= -0.5 + slack + 1e-9
