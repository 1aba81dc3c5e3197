"""Semi-algebraic systems, DNF formulas, and variable harmonization.

A :class:`SAS` is a conjunction of polynomial constraints in the canonical
relations ``>= 0``, ``!= 0`` and ``= 0``.  Strict inequalities are encoded
losslessly as ``{p >= 0, p != 0}`` pairs, so the certificate machinery only
ever sees the three canonical relations.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, Sequence, Tuple, Union

from .poly import Polynomial, VarEnv

MAX_DISJUNCTS = 64


class SasError(ValueError):
    """Constraint-layer error (unsatisfiable atom, bad formula, ...)."""


class HarmonizeError(SasError):
    """Variable harmonization failed (missing definition or cyclic defs)."""


@dataclass(frozen=True)
class SAS:
    """One semi-algebraic system: geqs (f >= 0), neqs (g != 0), eqs (h = 0).

    Trivially-true constraints (the zero polynomial under >= or =) are
    dropped at construction; a zero polynomial under != is rejected because
    ``0 != 0`` is unsatisfiable as written.
    """

    env: VarEnv
    geqs: Tuple[Polynomial, ...]
    neqs: Tuple[Polynomial, ...]
    eqs: Tuple[Polynomial, ...]

    def __post_init__(self):
        for group in (self.geqs, self.neqs, self.eqs):
            for p in group:
                if p.env != self.env:
                    raise SasError("all constraints must share the system environment")
        for p in self.neqs:
            if p.is_zero():
                raise SasError("0 != 0 is unsatisfiable and rejected at construction")
        object.__setattr__(self, "geqs", tuple(p for p in self.geqs if not p.is_zero()))
        object.__setattr__(self, "eqs", tuple(p for p in self.eqs if not p.is_zero()))

    @classmethod
    def of(
        cls,
        env: VarEnv,
        geqs: Iterable[Polynomial] = (),
        neqs: Iterable[Polynomial] = (),
        eqs: Iterable[Polynomial] = (),
    ) -> "SAS":
        return cls(env, tuple(geqs), tuple(neqs), tuple(eqs))

    def variables(self) -> Tuple[str, ...]:
        used = []
        seen = set()
        for p in (*self.geqs, *self.neqs, *self.eqs):
            for name in p.variables():
                if name not in seen:
                    seen.add(name)
                    used.append(name)
        return tuple(sorted(used, key=self.env.names.index))

    def satisfied_at(self, point: Sequence[float], eq_band: float = 0.0) -> bool:
        """Membership test at a point; equations allowed an absolute band."""
        return (
            all(p.eval(point) >= 0 for p in self.geqs)
            and all(p.eval(point) != 0 for p in self.neqs)
            and all(abs(p.eval(point)) <= eq_band for p in self.eqs)
        )

    def map_polys(self, fn) -> "SAS":
        return SAS(
            self.env,
            tuple(fn(p) for p in self.geqs),
            tuple(fn(p) for p in self.neqs),
            tuple(fn(p) for p in self.eqs),
        )


@dataclass(frozen=True)
class Formula:
    """Disjunction of semi-algebraic systems (a DNF of polynomial atoms)."""

    disjuncts: Tuple[SAS, ...]

    def __post_init__(self):
        if not self.disjuncts:
            raise SasError("a formula needs at least one disjunct")
        env = self.disjuncts[0].env
        if any(d.env != env for d in self.disjuncts):
            raise SasError("all disjuncts must share one environment")

    @property
    def env(self) -> VarEnv:
        return self.disjuncts[0].env


Relation = str  # one of ">=", ">", "<", "<=", "=", "!="

_RELATIONS = (">=", ">", "<=", "<", "!=", "=")


def normalize(expr: Polynomial, rel: Relation) -> List[Tuple[Polynomial, str]]:
    """Rewrite one atom into canonical constraints tagged "geq"/"neq"/"eq".

    p > 0  -> {p >= 0, p != 0};  p < 0 -> {-p >= 0, p != 0};  p <= 0 -> {-p >= 0};
    p >= 0, p = 0, p != 0 pass through.
    """
    if rel not in _RELATIONS:
        raise SasError(f"unknown relation {rel!r}")
    if expr.is_zero() and rel not in ("=", "!="):
        raise SasError(f"atom '0 {rel} 0' is trivial or unsatisfiable; not allowed")
    if rel == ">=":
        return [(expr, "geq")]
    if rel == ">":
        return [(expr, "geq"), (expr, "neq")]
    if rel == "<=":
        return [(-expr, "geq")]
    if rel == "<":
        return [(-expr, "geq"), (expr, "neq")]
    if rel == "=":
        return [(expr, "eq")]
    if expr.is_zero():
        raise SasError("0 != 0 is unsatisfiable")
    return [(expr, "neq")]


# -- boolean trees -----------------------------------------------------------

Atom = Tuple[Polynomial, Relation]


@dataclass(frozen=True)
class And:
    children: Tuple["Node", ...]


@dataclass(frozen=True)
class Or:
    children: Tuple["Node", ...]


@dataclass(frozen=True)
class Not:
    child: "Node"


Node = Union[And, Or, Not, Atom]

_NEGATION = {">=": "<", ">": "<=", "<": ">=", "<=": ">", "=": "!=", "!=": "="}


def _push_negations(node: Node, negate: bool) -> Node:
    if isinstance(node, Not):
        return _push_negations(node.child, not negate)
    if isinstance(node, And):
        kids = tuple(_push_negations(c, negate) for c in node.children)
        return Or(kids) if negate else And(kids)
    if isinstance(node, Or):
        kids = tuple(_push_negations(c, negate) for c in node.children)
        return And(kids) if negate else Or(kids)
    poly, rel = node
    return (poly, _NEGATION[rel]) if negate else node


def _to_dnf(node: Node) -> List[List[Atom]]:
    if isinstance(node, Or):
        out: List[List[Atom]] = []
        for child in node.children:
            out.extend(_to_dnf(child))
            if len(out) > MAX_DISJUNCTS:
                raise SasError(f"DNF exceeds {MAX_DISJUNCTS} disjuncts; prune the input")
        return out
    if isinstance(node, And):
        result: List[List[Atom]] = [[]]
        for child in node.children:
            grown = [prefix + clause for prefix in result for clause in _to_dnf(child)]
            if len(grown) > MAX_DISJUNCTS:
                raise SasError(f"DNF exceeds {MAX_DISJUNCTS} disjuncts; prune the input")
            result = grown
        return result
    return [[node]]  # atom


def sas_from_atoms(env: VarEnv, atoms: Iterable[Atom]) -> SAS:
    geqs: List[Polynomial] = []
    neqs: List[Polynomial] = []
    eqs: List[Polynomial] = []
    buckets = {"geq": geqs, "neq": neqs, "eq": eqs}
    for poly, rel in atoms:
        for p, kind in normalize(poly, rel):
            buckets[kind].append(p)
    return SAS.of(env, geqs, neqs, eqs)


def dnf_convert(tree: Node, env: VarEnv) -> Formula:
    """Push negations to atoms via trichotomy, distribute into DNF."""
    flat = _push_negations(tree, False)
    clauses = _to_dnf(flat)
    return Formula(tuple(sas_from_atoms(env, clause) for clause in clauses))


# -- definitional equations & harmonization ----------------------------------


@dataclass(frozen=True)
class DefEquations:
    """Acyclic map from eliminated variables to their defining polynomials."""

    defs: Mapping[str, Polynomial]

    def __post_init__(self):
        object.__setattr__(self, "defs", dict(self.defs))
        self.order()  # raises on cycles

    def __bool__(self) -> bool:
        return bool(self.defs)

    def order(self) -> List[str]:
        """Dependency order: later entries may reference earlier ones only."""
        pending = dict(self.defs)
        ordered: List[str] = []
        resolved: set = set()
        while pending:
            progressed = False
            for name, rhs in list(pending.items()):
                deps = set(rhs.variables()) & set(pending)
                if name in set(rhs.variables()):
                    raise HarmonizeError(f"definition of {name!r} mentions itself")
                if not deps:
                    ordered.append(name)
                    resolved.add(name)
                    del pending[name]
                    progressed = True
            if not progressed:
                raise HarmonizeError(
                    f"cyclic definitions among {sorted(pending)}; cannot order"
                )
        return ordered

    def flattened(self) -> Dict[str, Polynomial]:
        """Definitions with all defined variables substituted away."""
        flat: Dict[str, Polynomial] = {}
        for name in self.order():
            rhs = self.defs[name]
            inner = {k: v for k, v in flat.items() if k in rhs.variables()}
            flat[name] = rhs.substitute(inner) if inner else rhs
        return flat

    @classmethod
    def empty(cls) -> "DefEquations":
        return cls({})


def harmonize_variables(
    t1: SAS,
    t2: SAS,
    defs: DefEquations,
    shared: Iterable[str] = (),
) -> Tuple[SAS, SAS]:
    """Eliminate defined variables from both systems.

    After substitution, every variable occurring on only one side must either
    be in ``shared`` (the caller declares it global) or the call fails.
    """
    flat = defs.flattened()
    for name, rhs in flat.items():
        leftover = set(rhs.variables()) & set(flat)
        if leftover:
            raise HarmonizeError(f"definition of {name!r} still mentions {leftover}")

    def apply(p: Polynomial) -> Polynomial:
        relevant = {k: v for k, v in flat.items() if k in p.variables()}
        return p.substitute(relevant) if relevant else p

    out1 = t1.map_polys(apply)
    out2 = t2.map_polys(apply)
    v1, v2 = set(out1.variables()), set(out2.variables())
    unaccounted = (v1 ^ v2) - set(shared)
    if unaccounted:
        raise HarmonizeError(
            f"variables {sorted(unaccounted)} occur on one side only and have "
            "no definition; supply defs or declare them shared"
        )
    return out1, out2


# -- Archimedean form checking -----------------------------------------------


@dataclass(frozen=True)
class ArchReport:
    ok: bool
    missing: Tuple[str, ...]


def _affine_single_var_bound(p: Polynomial) -> Tuple[int, str] | None:
    """Recognize c*x + d >= 0; returns (var index, 'lower'|'upper') or None."""
    linear = None
    for mono, coeff in p.terms.items():
        deg = sum(mono)
        if deg == 0:
            continue
        if deg > 1 or linear is not None:
            return None
        linear = (mono.index(1), coeff)
    if linear is None:
        return None
    idx, coeff = linear
    return (idx, "lower" if coeff > 0 else "upper")


def _is_ball_bound(p: Polynomial) -> bool:
    """Recognize N - sum c_i x_i^2 >= 0 covering every variable (c_i > 0, N >= 0)."""
    n = len(p.env)
    covered = [False] * n
    const = 0.0
    for mono, coeff in p.terms.items():
        deg = sum(mono)
        if deg == 0:
            const = coeff
        elif deg == 2 and max(mono) == 2:
            if coeff >= 0:
                return False
            covered[mono.index(2)] = True
        else:
            return False
    return const >= 0 and all(covered)


def check_archimedean_form(t1: SAS, t2: SAS) -> ArchReport:
    """Syntactic boundedness check on the union of >=-constraints.

    ok iff every variable has an affine lower and upper bound among the geqs,
    or some single geq is a ball constraint covering all variables.  This is
    deliberately syntactic; the report lists what is missing.
    """
    env = t1.env
    geqs = list(t1.geqs) + list(t2.geqs)
    if any(_is_ball_bound(p) for p in geqs):
        return ArchReport(True, ())
    lower = [False] * len(env)
    upper = [False] * len(env)
    for p in geqs:
        hit = _affine_single_var_bound(p)
        if hit is None:
            continue
        idx, side = hit
        if side == "lower":
            lower[idx] = True
        else:
            upper[idx] = True
    mentioned = set(t1.variables()) | set(t2.variables())
    missing = tuple(
        name
        for i, name in enumerate(env.names)
        if name in mentioned and not (lower[i] and upper[i])
    )
    return ArchReport(not missing, missing)
