"""Interpolant synthesis from refutation certificates.

Two tracks:

* general mode: cone generators are the subset products of each side's
  >=-constraints, disequalities enter through an even power of their product,
  and equations get free polynomial multipliers.  Sound for any pair of
  mutually unsatisfiable systems, complete only when the certificate degree
  suffices.
* archimedean mode: both systems carry explicit variable bounds, equations are
  rewritten as inequality pairs, and the certificate lives in the quadratic
  module (one SOS multiplier per constraint, no products, no disequality
  part).  Complete for bounded systems without disequalities.

In both modes the separating polynomial is assembled from the first system's
share of the identity plus the constant 1/2, so it is >= 1/2 on the first
system and <= -1/2 on the second, up to the certificate residual.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from .certgen import CertConfig, Certificate, certificate_generation
from .poly import Polynomial, VarEnv
from .sas import SAS, DefEquations, check_archimedean_form, harmonize_variables

log = logging.getLogger(__name__)

MAX_GENERATORS = 1024

# The interpolation-level degree b counts the shared Gram basis degree (the
# recovered interpolant then has degree up to 2b + max generator degree).
# The certificate layer's bound counts multiplier total degree instead, so
# synthesis at level b searches certificates at bound 2b.  The disequality
# product's power keeps the level-b budget.
CERT_DEGREE_FACTOR = 2


class InterpError(ValueError):
    pass


class ArchimedeanPreconditionError(InterpError):
    """Archimedean mode prerequisites not met; carries the missing bounds."""

    def __init__(self, message: str, missing: Tuple[str, ...] = ()):
        super().__init__(message)
        self.missing = missing


@dataclass(frozen=True)
class Interpolant:
    q: Polynomial
    relation: str  # always "> 0"
    mode: str      # "general" | "archimedean"
    degree_bound: int
    certificate: Certificate
    t1_generator_count: int  # how many leading certificate generators came from t1

    def __str__(self):
        return f"{self.q.to_string(2)} > 0"


@dataclass(frozen=True)
class InterpolantFormula:
    """Disjunction over t1-disjuncts of conjunctions over t2-disjuncts."""

    matrix: Tuple[Tuple[Interpolant, ...], ...]

    def __post_init__(self):
        if not self.matrix or any(not row for row in self.matrix):
            raise InterpError("interpolant matrix must be complete and non-empty")
        width = len(self.matrix[0])
        if any(len(row) != width for row in self.matrix):
            raise InterpError("interpolant matrix must be complete and non-empty")

    def to_string(self, precision: int = 2) -> str:
        rows = []
        for row in self.matrix:
            conj = " and ".join(f"({i.q.to_string(precision)} > 0)" for i in row)
            rows.append(f"({conj})" if len(row) > 1 else conj)
        return " or ".join(rows)


def combine_interpolants(matrix: Sequence[Sequence[Interpolant]]) -> InterpolantFormula:
    return InterpolantFormula(tuple(tuple(row) for row in matrix))


def subset_products(fs: Sequence[Polynomial]) -> List[Polynomial]:
    """Products over all non-empty subsets, ordered by subset bitmask."""
    out: List[Polynomial] = []
    n = len(fs)
    if n and (1 << n) - 1 > MAX_GENERATORS:
        raise InterpError(
            f"{(1 << n) - 1} subset products exceed the {MAX_GENERATORS} generator "
            "cap; prune the constraint list"
        )
    for mask in range(1, 1 << n):
        prod = None
        for i in range(n):
            if mask & (1 << i):
                prod = fs[i] if prod is None else prod * fs[i]
        out.append(prod)  # type: ignore[arg-type]
    return out


def mult_monoid_power(
    gs: Sequence[Polynomial], b: int, env: VarEnv | None = None
) -> Polynomial:
    """(prod g_i^2) raised to floor(b / deg), or 1 when that degenerates.

    The empty product is 1 (env must be supplied then).  When the squared
    product already exceeds degree b the exponent floors to zero and the
    disequality information is dropped at this degree; a larger b restores it.
    """
    if not gs:
        if env is None:
            raise InterpError("empty product needs an explicit environment")
        return Polynomial.constant(env, 1.0)
    for g in gs:
        if g.is_zero():
            raise InterpError("zero polynomial in a disequality constraint")
    squared = None
    for g in gs:
        squared = g * g if squared is None else squared * (g * g)
    assert squared is not None
    deg = squared.degree()
    if deg <= 0:
        return squared  # constant product of squares
    exponent = int(b // deg)
    if exponent == 0:
        log.warning(
            "disequality product has degree %d > b=%d; monoid multiplier "
            "degenerates to 1 (consider a larger degree bound)",
            int(deg), b,
        )
        return Polynomial.constant(gs[0].env, 1.0)
    return squared**exponent


def sn_interpolants(
    t1: SAS,
    t2: SAS,
    defs: DefEquations,
    b: int,
    cfg: CertConfig | None = None,
    shared: Sequence[str] = (),
) -> Optional[Interpolant]:
    """General-mode synthesis at one fixed even degree bound b.

    Generators are the subset products of each side's >=-constraints (no
    cross products between the sides); all disequalities feed the monoid
    multiplier; all equations get free multipliers.  On success the
    interpolant is 1/2 + (t1's share of the certificate) + g > 0.
    """
    if b < 0 or b % 2:
        raise InterpError(f"degree bound must be even and >= 0, got {b}")
    t1, t2 = harmonize_variables(t1, t2, defs, shared)
    env = t1.env

    gens1 = subset_products(t1.geqs)
    gens2 = subset_products(t2.geqs)
    if len(gens1) + len(gens2) > MAX_GENERATORS:
        raise InterpError(
            f"{len(gens1) + len(gens2)} generators exceed the {MAX_GENERATORS} cap; "
            "prune the constraint lists"
        )
    gens = gens1 + gens2
    g = mult_monoid_power(list(t1.neqs) + list(t2.neqs), b, env)
    hs = list(t1.eqs) + list(t2.eqs)

    cert = certificate_generation(gens, g, hs, CERT_DEGREE_FACTOR * b, cfg)
    if cert is None:
        return None

    q = Polynomial.constant(env, 0.5) + g
    for sos, gen in zip(cert.p[: len(gens1)], gens1):
        q = q + sos.expand() * gen
    for mult, h in zip(cert.q[: len(t1.eqs)], t1.eqs):
        q = q + mult * h
    return Interpolant(
        q=q, relation="> 0", mode="general", degree_bound=b,
        certificate=cert, t1_generator_count=len(gens1),
    )


def _rewrite_equations(t: SAS) -> SAS:
    """Replace each h = 0 by the pair {h >= 0, -h >= 0} (exact)."""
    geqs = list(t.geqs)
    for h in t.eqs:
        geqs.append(h)
        geqs.append(-h)
    return SAS.of(t.env, geqs, t.neqs, ())


def rsn_interpolants(
    t1: SAS,
    t2: SAS,
    defs: DefEquations,
    b_max: int,
    cfg: CertConfig | None = None,
    shared: Sequence[str] = (),
    b_start: int = 2,
) -> Optional[Interpolant]:
    """Archimedean-mode synthesis with degree escalation b = 2, 4, ... b_max.

    Requires bounded systems (syntactic check) and no disequalities after
    harmonization; equations are rewritten as inequality pairs first.  The
    certificate searches the quadratic module: generators are exactly the two
    systems' >=-constraints, no subset products, no monoid part.
    """
    t1, t2 = harmonize_variables(t1, t2, defs, shared)
    t1 = _rewrite_equations(t1)
    t2 = _rewrite_equations(t2)
    if t1.neqs or t2.neqs:
        raise ArchimedeanPreconditionError(
            "archimedean mode admits only >=-constraints; disequalities present"
        )
    report = check_archimedean_form(t1, t2)
    if not report.ok:
        raise ArchimedeanPreconditionError(
            "every variable needs explicit lower and upper bounds (or a ball "
            f"constraint); missing for: {', '.join(report.missing)}",
            report.missing,
        )
    env = t1.env
    gens = list(t1.geqs) + list(t2.geqs)
    zero = Polynomial.zero(env)

    b = b_start
    while b <= b_max:
        cert = certificate_generation(gens, zero, [], CERT_DEGREE_FACTOR * b, cfg)
        if cert is not None:
            q = Polynomial.constant(env, 0.5)
            for sos, gen in zip(cert.p[: len(t1.geqs)], t1.geqs):
                q = q + sos.expand() * gen
            return Interpolant(
                q=q, relation="> 0", mode="archimedean", degree_bound=b,
                certificate=cert, t1_generator_count=len(t1.geqs),
            )
        b += 2
    return None


def sn_interpolants_escalate(
    t1: SAS,
    t2: SAS,
    defs: DefEquations,
    b_start: int,
    b_max: int,
    cfg: CertConfig | None = None,
    shared: Sequence[str] = (),
) -> Optional[Interpolant]:
    """General-mode wrapper escalating b by 2 until b_max; first success wins."""
    b = b_start
    while b <= b_max:
        found = sn_interpolants(t1, t2, defs, b, cfg, shared)
        if found is not None:
            return found
        b += 2
    return None
