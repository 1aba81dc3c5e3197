import random

import numpy as np
import pytest

from sosinterp.certgen import (
    CertGenError,
    Certificate,
    SosPoly,
    build_identity_template,
    certificate_generation,
    extract_sos,
    format_certificate,
    residual,
)
from sosinterp.poly import Polynomial, VarEnv, monomial_basis, parse_poly
from sosinterp.sdp import SymMatrix

ENV1 = VarEnv.of(["x"])
ENV2 = VarEnv.of(["x1", "x2"])


def test_template_constant_only():
    # fs = {-1}, g = 0, b = 0: blocks p0 and p1 (both 1x1), one constraint
    # over the constant monomial encoding 1 + p0 - p1 = 0.
    minus1 = Polynomial.constant(ENV1, -1.0)
    zero = Polynomial.zero(ENV1)
    prob, info = build_identity_template([minus1], zero, [], 0)
    assert prob.block_dims == (1, 1)
    assert prob.m == 1
    assert info.monomials == ((0,),)
    assert prob.A[0].blocks[0].full()[0, 0] == 1.0   # p0 coefficient
    assert prob.A[0].blocks[1].full()[0, 0] == -1.0  # p1 * (-1)
    assert prob.b[0] == -1.0                          # moved literal 1


def test_template_rejects_odd_degree():
    with pytest.raises(CertGenError):
        build_identity_template([], Polynomial.zero(ENV1), [], 3)


def test_template_constraint_count_matches_expansion_support():
    # constraint count equals the number of monomials in the symbolic
    # expansion's support (here: all monomials of degree <= b + max deg)
    f = parse_poly("x1^2 + x2^2 - 2", ENV2)
    g = Polynomial.constant(ENV2, 1.0)
    prob, info = build_identity_template([f], g, [], 4)
    # p0 and p1 range over all of degree <= 4; p1*f reaches degree 6 and its
    # support, plus p0's, is exactly the even-degree-compatible set computed
    # symbolically below.
    support = set()
    basis = monomial_basis(ENV2, 2)
    for i, mi in enumerate(basis.monomials):
        for mj in basis.monomials[i:]:
            pair = tuple(a + b for a, b in zip(mi, mj))
            support.add(pair)  # p0 block
            for mono in f.terms:
                support.add(tuple(a + b for a, b in zip(pair, mono)))
    support.add((0, 0))
    assert prob.m == len(support)
    assert set(info.monomials) == support


def coefficient_matching_check(rng, env):
    """Template-builder rows must equal symbolic expansion coefficients."""
    nterms = rng.randint(1, 5)
    terms = {}
    for _ in range(nterms):
        mono = tuple(rng.randint(0, 2) for _ in env.names)
        terms[mono] = float(rng.randint(-6, 6))
    f = Polynomial(env, terms)
    if f.is_zero():
        f = f + 1.0
    b = rng.choice([0, 2, 4])
    prob, info = build_identity_template([f], Polynomial.zero(env), [], b)
    nb = len(info.basis)
    # random PSD Gram with exactly representable entries
    base = np.array(
        [[rng.randint(-3, 3) for _ in range(nb)] for _ in range(nb)], dtype=float
    )
    gram = base @ base.T
    sos = SosPoly(info.basis, SymMatrix(gram))
    product = sos.expand() * f

    # block 1 of each constraint row holds the coefficients for p1 = f-block
    for idx, mono in enumerate(info.monomials):
        a_block = prob.A[idx].blocks[1].full()
        predicted = float(np.tensordot(a_block, gram))
        assert predicted == pytest.approx(product.coeff(mono), abs=1e-12)
    # and every product monomial is covered by a constraint row
    assert set(product.terms) <= set(info.monomials)


def test_template_coefficient_matching_randomized():
    rng = random.Random(2718)
    env3 = VarEnv.of(["x1", "x2", "x3"])
    for trial in range(120):
        coefficient_matching_check(rng, ENV2 if trial % 2 else env3)


def test_certificate_for_separated_halflines():
    x = parse_poly("x", ENV1)
    cert = certificate_generation(
        [x, parse_poly("0 - x - 1", ENV1)], Polynomial.constant(ENV1, 1.0), [], 0
    )
    assert cert is not None
    assert cert.residual.max_abs_coeff() <= 1e-8
    # hand identity: 1 + p1*x + p2*(-x-1) + 1 = 0 forces p1 = p2 = 2 + p0
    p1 = cert.p[0].expand().coeff((0,))
    p2 = cert.p[1].expand().coeff((0,))
    assert p1 == pytest.approx(p2, abs=1e-6)
    assert p1 >= 2.0 - 1e-6


def test_certificate_for_negative_constant():
    cert = certificate_generation(
        [Polynomial.constant(ENV1, -1.0)], Polynomial.zero(ENV1), [], 0
    )
    assert cert is not None
    assert cert.residual.max_abs_coeff() <= 1e-8


def test_negative_case_never_certified():
    fs = [parse_poly(s, ENV2) for s in ("x1", "x2", "0 - x1*x2 - 1")]
    zero = Polynomial.zero(ENV2)
    for b in (2, 4, 6):
        assert certificate_generation(fs, zero, [], b) is None


def test_negative_case_sdp_never_feasible():
    from sosinterp.sdp import feasibility

    fs = [parse_poly(s, ENV2) for s in ("x1", "x2", "0 - x1*x2 - 1")]
    prob, _ = build_identity_template(fs, Polynomial.zero(ENV2), [], 2)
    assert feasibility(prob).status in ("Infeasible", "Unknown")


def test_extract_sos_identity_gram():
    basis = monomial_basis(ENV1, 1)
    sos = SosPoly(basis, SymMatrix(np.eye(2)))
    out = extract_sos(sos, 1e-9)
    recon = Polynomial.zero(ENV1)
    for w, ell in out:
        recon = recon + ell * ell * w
    assert recon == sos.expand()  # 1 + x^2, exactly representable


def test_extract_sos_rank_one():
    basis = monomial_basis(ENV1, 1)
    sos = SosPoly(basis, SymMatrix(np.ones((2, 2))))
    out = extract_sos(sos, 1e-9)
    assert len(out) == 1
    w, ell = out[0]
    # 2 * ((1+x)/sqrt(2))^2 = (1+x)^2
    recon = ell * ell * w
    assert recon.coeff((0,)) == pytest.approx(1.0)
    assert recon.coeff((1,)) == pytest.approx(2.0)
    assert recon.coeff((2,)) == pytest.approx(1.0)


def test_extract_sos_zero_gram_empty():
    basis = monomial_basis(ENV1, 1)
    sos = SosPoly(basis, SymMatrix(np.zeros((2, 2))))
    assert extract_sos(sos, 1e-9) == []


def test_extract_sos_round_trip_randomized():
    rng = np.random.default_rng(99)
    env3 = VarEnv.of(["a", "b", "c"])
    for _ in range(200):
        d = int(rng.integers(1, 3))
        basis = monomial_basis(env3, d)
        n = len(basis)
        base = rng.normal(size=(n, n))
        gram = base @ base.T
        sos = SosPoly(basis, SymMatrix(gram))
        target = sos.expand()
        recon = Polynomial.zero(env3)
        for w, ell in extract_sos(sos, 1e-9):
            recon = recon + ell * ell * w
        diff = (recon - target).max_abs_coeff()
        assert diff <= 1e-8 * max(1.0, target.max_abs_coeff())


def test_residual_reflects_perturbation():
    x = parse_poly("x", ENV1)
    cert = certificate_generation(
        [x, parse_poly("0 - x - 1", ENV1)], Polynomial.constant(ENV1, 1.0), [], 0
    )
    base = residual(cert).max_abs_coeff()
    bumped_gram = cert.p0.gram.full()
    bumped_gram[0, 0] += 0.001
    bumped = Certificate(
        fs=cert.fs, hs=cert.hs, g=cert.g,
        p0=SosPoly(cert.p0.basis, SymMatrix(bumped_gram)),
        p=cert.p, q=cert.q, residual=cert.residual,
    )
    assert residual(bumped).max_abs_coeff() == pytest.approx(base + 0.001, abs=1e-9)


def test_equation_multipliers_recovered():
    # {x >= 0} with equation x - 1 = 0 is unsatisfiable... x=1 satisfies x>=0;
    # instead use fs={-x}, h = x - 1: 1 + p1*(-x) + q*(x-1) needs q free sign.
    env = ENV1
    cert = certificate_generation(
        [parse_poly("0 - x", env)],
        Polynomial.zero(env),
        [parse_poly("x - 1", env)],
        2,
    )
    assert cert is not None
    assert len(cert.q) == 1
    assert cert.residual.max_abs_coeff() <= 1e-6 * cert.summand_scale()


def test_format_certificate_mentions_parts():
    x = parse_poly("x", ENV1)
    cert = certificate_generation(
        [x, parse_poly("0 - x - 1", ENV1)], Polynomial.constant(ENV1, 1.0), [], 0
    )
    text = format_certificate(cert, precision=2)
    assert "p0" in text and "residual" in text and "Gram" in text
