"""Bounded-degree refutation certificates via sum-of-squares programming.

The target identity is

    1 + p0 + sum_i p_i * f_i + g + sum_i (q_i1 - q_i2) * h_i  ==  0

where p0, p_i, q_i1, q_i2 are unknown SOS polynomials, the f_i are supplied
generators (products already formed by the caller), g is a fixed polynomial,
and the h_i are equation constraints.  Matching coefficients of every monomial
that can occur in the expansion yields one linear constraint per monomial on
the block-diagonal Gram matrix, i.e. a semidefinite feasibility problem.
Known parts (the literal 1 and g) are moved to the right-hand side.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .poly import Exponents, GramBasis, Polynomial, VarEnv, monomial_basis
from .sdp import (
    BlockMatrix,
    SdpProblem,
    SolverConfig,
    SymMatrix,
    feasibility,
    min_eigenvalue,
    psd_factor,
)

log = logging.getLogger(__name__)


class CertGenError(ValueError):
    pass


@dataclass
class CertConfig:
    accept_tol: float = 1e-6   # residual bound, relative to largest summand coeff
    psd_tol: float = 1e-6      # Gram blocks must satisfy min eig >= -psd_tol*scale
    solver: SolverConfig | None = None
    dump_prefix: str | None = None  # write each assembled SDP to <prefix>b<b>.dat

    def solver_config(self) -> SolverConfig:
        return self.solver or SolverConfig()


@dataclass(frozen=True)
class SosPoly:
    """SOS polynomial represented by a Gram matrix over a monomial basis."""

    basis: GramBasis
    gram: SymMatrix

    def __post_init__(self):
        if self.gram.dim != len(self.basis):
            raise CertGenError(
                f"Gram dimension {self.gram.dim} != basis size {len(self.basis)}"
            )

    def expand(self) -> Polynomial:
        """The represented polynomial Z' Q Z, fully expanded."""
        a = self.gram.full()
        terms: Dict[Exponents, float] = {}
        monos = self.basis.monomials
        for i in range(len(monos)):
            for j in range(i, len(monos)):
                coeff = a[i, j] if i == j else 2.0 * a[i, j]
                if coeff == 0.0:
                    continue
                m = tuple(x + y for x, y in zip(monos[i], monos[j]))
                terms[m] = terms.get(m, 0.0) + coeff
        return Polynomial(self.basis.env, terms)

    def min_eig(self) -> float:
        return min_eigenvalue(self.gram)


@dataclass(frozen=True)
class Certificate:
    """Accepted refutation: multipliers plus the (numerically tiny) residual."""

    fs: Tuple[Polynomial, ...]
    hs: Tuple[Polynomial, ...]
    g: Polynomial
    p0: SosPoly
    p: Tuple[SosPoly, ...]          # one per generator in fs
    q: Tuple[Polynomial, ...]       # q_i = q_i1 - q_i2, one per h
    residual: Polynomial

    def gram_blocks(self) -> List[SosPoly]:
        return [self.p0, *self.p]

    def worst_gram_eig(self) -> float:
        return min(s.min_eig() for s in self.gram_blocks())

    def summand_scale(self) -> float:
        """Largest coefficient magnitude among the identity's summands."""
        scale = 1.0  # the literal 1
        scale = max(scale, self.g.max_abs_coeff())
        scale = max(scale, self.p0.expand().max_abs_coeff())
        for sos, f in zip(self.p, self.fs):
            scale = max(scale, (sos.expand() * f).max_abs_coeff())
        for mult, h in zip(self.q, self.hs):
            scale = max(scale, (mult * h).max_abs_coeff())
        return scale


@dataclass(frozen=True)
class TemplateInfo:
    """Bookkeeping mapping SDP blocks and constraints back to the identity."""

    env: VarEnv
    degree: int
    basis: GramBasis
    fs: Tuple[Polynomial, ...]
    hs: Tuple[Polynomial, ...]
    g: Polynomial
    monomials: Tuple[Exponents, ...]  # one SDP constraint per entry, in order
    block_roles: Tuple[Tuple[str, int], ...]  # ("p0",0) | ("f",i) | ("q1"/"q2",i)


def _basis_pair_products(basis: GramBasis):
    """All (i, j, i<=j, product monomial) triples of the Gram basis."""
    monos = basis.monomials
    out = []
    for i in range(len(monos)):
        for j in range(i, len(monos)):
            out.append((i, j, tuple(x + y for x, y in zip(monos[i], monos[j]))))
    return out


def _active_basis(env: VarEnv, polys: Sequence[Polynomial], d: int) -> GramBasis:
    """Monomial basis of degree <= d supported on the variables polys mention.

    Multipliers over variables no input mentions only add dead SDP freedom
    (and can leak those variables into recovered multipliers), so the basis
    is restricted to the active ones; it is the full graded-lex basis of the
    active sub-environment, embedded in env.
    """
    active = set()
    for p in polys:
        active.update(p.variables())
    if len(active) == len(env):
        return monomial_basis(env, d)
    live = [i for i, name in enumerate(env.names) if name in active]
    if not live or d == 0:
        return GramBasis(env, d, ((0,) * len(env),))
    sub = monomial_basis(VarEnv.of(env.names[i] for i in live), d)
    embedded = []
    for mono in sub.monomials:
        full = [0] * len(env)
        for pos, e in zip(live, mono):
            full[pos] = e
        embedded.append(tuple(full))
    return GramBasis(env, d, tuple(embedded))


def build_identity_template(
    fs: Sequence[Polynomial],
    g: Polynomial,
    hs: Sequence[Polynomial],
    b: int,
) -> Tuple[SdpProblem, TemplateInfo]:
    """Assemble the coefficient-matching SDP for the identity at degree bound b.

    One Gram block of basis degree floor(b/2) per SOS unknown: p0, one p_i per
    f_i, and the pair (q_i1, q_i2) per h_i.  Every monomial that can occur in
    the symbolic expansion contributes one linear constraint; the literal 1
    and g land on the right-hand side.
    """
    if b < 0 or b % 2 != 0:
        raise CertGenError(f"degree bound must be even and >= 0, got {b}")
    env = g.env
    for p in (*fs, *hs):
        if p.env != env:
            raise CertGenError("all polynomials must share one environment")
    basis = _active_basis(env, (*fs, g, *hs), b // 2)
    pairs = _basis_pair_products(basis)
    nb = len(basis)

    # (role, generator polynomial entering the product with the Gram block)
    blocks: List[Tuple[Tuple[str, int], Polynomial]] = [
        (("p0", 0), Polynomial.constant(env, 1.0))
    ]
    for i, f in enumerate(fs):
        blocks.append((("f", i), f))
    for i, h in enumerate(hs):
        blocks.append((("q1", i), h))
        blocks.append((("q2", i), -h))

    # constraint rows: monomial -> per-block dense symmetric matrix
    rows: Dict[Exponents, List[Optional[np.ndarray]]] = {}

    def row_for(mono: Exponents) -> List[Optional[np.ndarray]]:
        row = rows.get(mono)
        if row is None:
            row = [None] * len(blocks)
            rows[mono] = row
        return row

    for k, (_, gen) in enumerate(blocks):
        for i, j, pair_mono in pairs:
            for gmono, gcoeff in gen.terms.items():
                mono = tuple(x + y for x, y in zip(pair_mono, gmono))
                row = row_for(mono)
                if row[k] is None:
                    row[k] = np.zeros((nb, nb))
                row[k][i, j] += gcoeff
                if i != j:
                    row[k][j, i] += gcoeff

    known = Polynomial.constant(env, 1.0) + g
    for mono in known.terms:
        row_for(mono)

    from .poly import grlex_key

    ordered = sorted(rows, key=grlex_key)
    a_mats: List[BlockMatrix] = []
    b_vec = np.zeros(len(ordered))
    for idx, mono in enumerate(ordered):
        row = rows[mono]
        mats = [
            SymMatrix(row[k]) if row[k] is not None else SymMatrix(np.zeros((nb, nb)))
            for k in range(len(blocks))
        ]
        a_mats.append(BlockMatrix(mats))
        b_vec[idx] = -known.terms.get(mono, 0.0)

    dims = tuple(nb for _ in blocks)
    problem = SdpProblem(dims, BlockMatrix.zeros(dims), tuple(a_mats), b_vec)
    info = TemplateInfo(
        env=env,
        degree=b,
        basis=basis,
        fs=tuple(fs),
        hs=tuple(hs),
        g=g,
        monomials=tuple(ordered),
        block_roles=tuple(role for role, _ in blocks),
    )
    return problem, info


def residual(cert: Certificate) -> Polynomial:
    """Symbolic 1 + p0 + sum p_i f_i + g + sum q_i h_i, expanded."""
    env = cert.g.env
    total = Polynomial.constant(env, 1.0) + cert.p0.expand() + cert.g
    for sos, f in zip(cert.p, cert.fs):
        total = total + sos.expand() * f
    for mult, h in zip(cert.q, cert.hs):
        total = total + mult * h
    return total


def certificate_generation(
    fs: Sequence[Polynomial],
    g: Polynomial,
    hs: Sequence[Polynomial],
    b: int,
    cfg: CertConfig | None = None,
) -> Optional[Certificate]:
    """Search for a degree-b certificate; None when the SDP offers nothing.

    A returned Certificate has been re-checked symbolically: the residual is
    recomputed from the extracted multipliers and must be small relative to
    the largest summand, and every Gram block must be PSD within tolerance.
    """
    cfg = cfg or CertConfig()
    problem, info = build_identity_template(fs, g, hs, b)
    if cfg.dump_prefix is not None:
        from .sdp import dump_problem

        with open(f"{cfg.dump_prefix}b{b}.dat", "w", encoding="utf-8") as fh:
            fh.write(dump_problem(problem))
    feas = feasibility(problem, cfg.solver_config())
    if feas.status != "Feasible":
        log.info(
            "certificate search at b=%d: SDP %s (%d constraints)",
            b, feas.status, problem.m,
        )
        return None

    assert feas.X is not None
    blocks = feas.X.blocks
    p0 = SosPoly(info.basis, blocks[0])
    p = tuple(
        SosPoly(info.basis, blocks[1 + i]) for i in range(len(info.fs))
    )
    q: List[Polynomial] = []
    base = 1 + len(info.fs)
    for i in range(len(info.hs)):
        q1 = SosPoly(info.basis, blocks[base + 2 * i]).expand()
        q2 = SosPoly(info.basis, blocks[base + 2 * i + 1]).expand()
        q.append(q1 - q2)

    cert = Certificate(
        fs=info.fs, hs=info.hs, g=info.g, p0=p0, p=p, q=tuple(q),
        residual=Polynomial.zero(info.env),
    )
    cert = replace(cert, residual=residual(cert))
    res = cert.residual

    scale = cert.summand_scale()
    if res.max_abs_coeff() > cfg.accept_tol * scale:
        log.warning(
            "certificate at b=%d rejected: residual %.3e exceeds %.3e",
            b, res.max_abs_coeff(), cfg.accept_tol * scale,
        )
        return None
    worst = cert.worst_gram_eig()
    gram_scale = max(
        1.0, max(float(np.max(np.abs(s.gram.full()))) for s in cert.gram_blocks())
    )
    if worst < -cfg.psd_tol * gram_scale:
        log.warning(
            "certificate at b=%d rejected: Gram eigenvalue %.3e below -%.3e",
            b, worst, cfg.psd_tol * gram_scale,
        )
        return None
    return cert


def extract_sos(s: SosPoly, tol: float) -> List[Tuple[float, Polynomial]]:
    """Write Z' Q Z as an explicit weighted sum of squared polynomials."""
    factors = psd_factor(s.gram, tol)
    out = []
    for weight, vec in factors:
        terms: Dict[Exponents, float] = {}
        for coeff, mono in zip(vec, s.basis.monomials):
            if coeff != 0.0:
                terms[mono] = terms.get(mono, 0.0) + float(coeff)
        out.append((weight, Polynomial(s.basis.env, terms)))
    return out


def format_certificate(cert: Certificate, precision: int = 2) -> str:
    """Structured text report: multipliers, Gram eigenvalue summary, residual."""
    lines = ["certificate:"]
    lines.append(f"  p0 = {cert.p0.expand().to_string(precision)}")
    for i, (sos, f) in enumerate(zip(cert.p, cert.fs), start=1):
        lines.append(f"  p{i} = {sos.expand().to_string(precision)}")
        lines.append(f"    generator f{i} = {f.to_string(precision)}")
    if not cert.g.is_zero():
        lines.append(f"  g  = {cert.g.to_string(precision)}")
    for i, (mult, h) in enumerate(zip(cert.q, cert.hs), start=1):
        lines.append(f"  q{i} = {mult.to_string(precision)}")
        lines.append(f"    equation h{i} = {h.to_string(precision)}")
    lines.append(f"  worst Gram eigenvalue: {cert.worst_gram_eig():.3e}")
    lines.append(f"  residual max |coeff|:  {cert.residual.max_abs_coeff():.3e}")
    return "\n".join(lines)
