"""Sparse multivariate polynomial arithmetic over a fixed variable environment.

Every polynomial in a problem refers to one shared :class:`VarEnv`; monomials
are plain exponent tuples aligned with the environment's variable order.
Coefficients are double-precision floats, and canonical form drops
coefficients at or below ``COEFF_DROP_TOL`` so that inexact multiplier
recovery cannot blow up the term count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Iterable, Mapping, Sequence, Tuple

Exponents = Tuple[int, ...]

# Canonicalization threshold: coefficients with |c| <= this vanish after
# arithmetic.  Chosen two orders below the tightest solver tolerance.
COEFF_DROP_TOL = 1e-12

NEG_INF = float("-inf")


class PolyError(ValueError):
    """Base class for polynomial-layer errors."""


class PolyParseError(PolyError):
    """Syntax or semantic error in a polynomial expression string."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


@dataclass(frozen=True)
class VarEnv:
    """Ordered, duplicate-free list of variable names shared by all polynomials."""

    names: Tuple[str, ...]

    def __post_init__(self):
        if not self.names:
            raise PolyError("variable environment must not be empty")
        if len(set(self.names)) != len(self.names):
            raise PolyError(f"duplicate variable names in {self.names}")
        object.__setattr__(self, "_index", {n: i for i, n in enumerate(self.names)})

    @classmethod
    def of(cls, names: Iterable[str]) -> "VarEnv":
        return cls(tuple(names))

    def index(self, name: str) -> int:
        try:
            return self._index[name]  # type: ignore[attr-defined]
        except KeyError:
            raise PolyError(f"unknown variable {name!r}; environment is {self.names}")

    def __len__(self) -> int:
        return len(self.names)

    def __contains__(self, name: str) -> bool:
        return name in self._index  # type: ignore[attr-defined]


class Polynomial:
    """Immutable sparse polynomial: mapping exponent tuple -> float coefficient."""

    __slots__ = ("env", "terms")

    def __init__(self, env: VarEnv, terms: Mapping[Exponents, float]):
        canon: Dict[Exponents, float] = {}
        n = len(env)
        for mono, coeff in terms.items():
            if len(mono) != n:
                raise PolyError(f"monomial {mono} has wrong arity for {env.names}")
            c = float(coeff)
            if not math.isfinite(c):
                raise PolyError(f"non-finite coefficient {coeff!r}")
            if abs(c) > COEFF_DROP_TOL:
                canon[mono] = c
        object.__setattr__(self, "env", env)
        object.__setattr__(self, "terms", canon)

    def __setattr__(self, *_):
        raise AttributeError("Polynomial is immutable")

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, env: VarEnv) -> "Polynomial":
        return cls(env, {})

    @classmethod
    def constant(cls, env: VarEnv, value: float) -> "Polynomial":
        return cls(env, {(0,) * len(env): value})

    @classmethod
    def variable(cls, env: VarEnv, name: str) -> "Polynomial":
        i = env.index(name)
        mono = tuple(1 if j == i else 0 for j in range(len(env)))
        return cls(env, {mono: 1.0})

    # -- structure ---------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> float:
        """Total degree; the zero polynomial reports -inf."""
        if not self.terms:
            return NEG_INF
        return max(sum(m) for m in self.terms)

    def max_abs_coeff(self) -> float:
        return max((abs(c) for c in self.terms.values()), default=0.0)

    def variables(self) -> Tuple[str, ...]:
        """Names actually occurring with nonzero exponent, in env order."""
        used = set()
        for mono in self.terms:
            for i, e in enumerate(mono):
                if e:
                    used.add(i)
        return tuple(self.env.names[i] for i in sorted(used))

    def coeff(self, mono: Exponents) -> float:
        return self.terms.get(tuple(mono), 0.0)

    # -- arithmetic --------------------------------------------------------

    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            if other.env is not self.env and other.env != self.env:
                raise PolyError("mismatched variable environments")
            return other
        if isinstance(other, (int, float)):
            return Polynomial.constant(self.env, float(other))
        return NotImplemented  # type: ignore[return-value]

    def __add__(self, other) -> "Polynomial":
        q = self._coerce(other)
        if q is NotImplemented:
            return NotImplemented
        out = dict(self.terms)
        for m, c in q.terms.items():
            out[m] = out.get(m, 0.0) + c
        return Polynomial(self.env, out)

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial(self.env, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other) -> "Polynomial":
        q = self._coerce(other)
        if q is NotImplemented:
            return NotImplemented
        return self + (-q)

    def __rsub__(self, other) -> "Polynomial":
        return (-self) + other

    def __mul__(self, other) -> "Polynomial":
        q = self._coerce(other)
        if q is NotImplemented:
            return NotImplemented
        out: Dict[Exponents, float] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in q.terms.items():
                m = tuple(a + b for a, b in zip(m1, m2))
                out[m] = out.get(m, 0.0) + c1 * c2
        return Polynomial(self.env, out)

    __rmul__ = __mul__

    def __pow__(self, exponent: int) -> "Polynomial":
        if not isinstance(exponent, int) or exponent < 0:
            raise PolyError(f"exponent must be a non-negative integer, got {exponent!r}")
        result = Polynomial.constant(self.env, 1.0)
        base = self
        e = exponent
        while e:
            if e & 1:
                result = result * base
            base = base * base if e > 1 else base
            e >>= 1
        return result

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Polynomial)
            and self.env == other.env
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.env, frozenset(self.terms.items())))

    # -- evaluation & substitution ------------------------------------------

    def eval(self, point: Sequence[float]) -> float:
        """Value at a point given in env order."""
        if len(point) != len(self.env):
            raise PolyError(
                f"point has dimension {len(point)}, environment has {len(self.env)}"
            )
        total = 0.0
        for mono, coeff in self.terms.items():
            term = coeff
            for i, e in enumerate(mono):
                if e:
                    term *= point[i] ** e
            total += term
        return total

    def substitute(self, bindings: Mapping[str, "Polynomial"]) -> "Polynomial":
        """Replace each bound variable by its polynomial, fully expanded.

        All bound names must exist in the environment; replacement polynomials
        must live in the same environment.
        """
        idx_bindings: Dict[int, Polynomial] = {}
        for name, repl in bindings.items():
            i = self.env.index(name)
            if repl.env != self.env:
                raise PolyError(f"replacement for {name!r} uses a different environment")
            idx_bindings[i] = repl
        if not idx_bindings:
            return self
        out = Polynomial.zero(self.env)
        for mono, coeff in self.terms.items():
            residue = list(mono)
            factor = Polynomial.constant(self.env, coeff)
            for i, repl in idx_bindings.items():
                e = mono[i]
                if e:
                    residue[i] = 0
                    factor = factor * repl**e
            out = out + factor * Polynomial(self.env, {tuple(residue): 1.0})
        return out

    # -- printing ------------------------------------------------------------

    def _mono_str(self, mono: Exponents) -> str:
        parts = []
        for name, e in zip(self.env.names, mono):
            if e == 1:
                parts.append(name)
            elif e > 1:
                parts.append(f"{name}^{e}")
        return "*".join(parts)

    def to_string(self, precision: int | None = None) -> str:
        if not self.terms:
            return "0"
        pieces = []
        for mono in sorted(self.terms, key=grlex_key):
            c = self.terms[mono]
            mstr = self._mono_str(mono)
            cstr = f"{c:.{precision}f}" if precision is not None else repr(c)
            if cstr.lstrip("-").strip("0").strip(".") == "" and precision is not None:
                # rounded away entirely at this precision; keep it visible
                cstr = f"{c:.{precision}e}"
            if mstr:
                if c == 1.0 and precision is None:
                    piece = mstr
                elif c == -1.0 and precision is None:
                    piece = f"-{mstr}"
                else:
                    piece = f"{cstr}*{mstr}"
            else:
                piece = cstr
            pieces.append(piece)
        text = pieces[0]
        for piece in pieces[1:]:
            text += f" - {piece[1:]}" if piece.startswith("-") else f" + {piece}"
        return text

    def __repr__(self):
        return f"Polynomial({self.to_string()})"


def grlex_key(mono: Exponents):
    """Sort key for graded lexicographic order (degree, then lex with x1 first)."""
    return (sum(mono), tuple(-e for e in mono))


@dataclass(frozen=True)
class GramBasis:
    """All monomials of total degree <= ``degree`` in graded-lex order.

    The first entry is the constant monomial; the size is binomial(n+d, n).
    """

    env: VarEnv
    degree: int
    monomials: Tuple[Exponents, ...]

    def __post_init__(self):
        object.__setattr__(self, "_index", {m: i for i, m in enumerate(self.monomials)})

    def index(self, mono: Exponents) -> int:
        return self._index[mono]  # type: ignore[attr-defined]

    def __len__(self) -> int:
        return len(self.monomials)


def _exponents_of_degree(total: int, nvars: int):
    if nvars == 1:
        yield (total,)
        return
    for head in range(total, -1, -1):
        for rest in _exponents_of_degree(total - head, nvars - 1):
            yield (head,) + rest


def monomial_basis(env: VarEnv, degree: int) -> GramBasis:
    """Graded-lex basis of all monomials of total degree <= degree."""
    if degree < 0:
        raise PolyError(f"degree must be >= 0, got {degree}")
    n = len(env)
    monos = []
    for total in range(degree + 1):
        monos.extend(_exponents_of_degree(total, n))
    basis = GramBasis(env, degree, tuple(monos))
    assert len(basis) == math.comb(n + degree, n)
    return basis


# ---------------------------------------------------------------------------
# Expression parsing
# ---------------------------------------------------------------------------
#
# Grammar (whitespace insignificant, '*' required for products):
#   expr    := ['+'|'-'] term (('+'|'-') term)*
#   term    := factor ('*' factor)*
#   factor  := atom ['^' uint]
#   atom    := number | ident | '(' expr ')'


class _Parser:
    def __init__(self, text: str, env: VarEnv):
        self.text = text
        self.env = env
        self.pos = 0

    def error(self, message: str):
        raise PolyParseError(message, self.pos)

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def take(self) -> str:
        ch = self.peek()
        self.pos += 1
        return ch

    def parse(self) -> Polynomial:
        result = self.parse_expr()
        if self.peek():
            self.error(f"unexpected {self.peek()!r}")
        return result

    def parse_expr(self) -> Polynomial:
        sign = 1.0
        if self.peek() in ("+", "-"):
            sign = -1.0 if self.take() == "-" else 1.0
        result = self.parse_term() * sign
        while self.peek() in ("+", "-"):
            op = self.take()
            term = self.parse_term()
            result = result + term if op == "+" else result - term
        return result

    def parse_term(self) -> Polynomial:
        result = self.parse_factor()
        while self.peek() == "*":
            self.take()
            result = result * self.parse_factor()
        return result

    def parse_factor(self) -> Polynomial:
        base = self.parse_atom()
        if self.peek() == "^":
            self.take()
            exp = self.parse_uint()
            return base**exp
        return base

    def parse_uint(self) -> int:
        self.skip_ws()
        if self.peek() == "-":
            self.error("negative exponent")
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if self.pos == start:
            self.error("expected a non-negative integer exponent")
        if self.pos < len(self.text) and self.text[self.pos] == ".":
            self.error("non-integer exponent")
        return int(self.text[start : self.pos])

    def parse_atom(self) -> Polynomial:
        ch = self.peek()
        if ch == "(":
            self.take()
            inner = self.parse_expr()
            if self.peek() != ")":
                self.error("expected ')'")
            self.take()
            return inner
        if ch == "-":
            # unary minus inside a product, e.g. "2*-x" is rejected; only at
            # expression heads (handled in parse_expr) and inside parens.
            self.error("unexpected '-'")
        if ch.isdigit() or ch == ".":
            return Polynomial.constant(self.env, self.parse_number())
        if ch.isalpha() or ch == "_":
            return Polynomial.variable(self.env, self.parse_ident())
        self.error(f"unexpected {ch!r}" if ch else "unexpected end of input")
        raise AssertionError  # unreachable

    def parse_number(self) -> float:
        self.skip_ws()
        start = self.pos
        seen_dot = False
        while self.pos < len(self.text):
            c = self.text[self.pos]
            if c.isdigit():
                self.pos += 1
            elif c == "." and not seen_dot:
                seen_dot = True
                self.pos += 1
            else:
                break
        token = self.text[start : self.pos]
        if token in ("", "."):
            self.error("malformed number")
        return float(token)

    def parse_ident(self) -> str:
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text):
            c = self.text[self.pos]
            if c.isalnum() or c in "_'":
                self.pos += 1
            else:
                break
        name = self.text[start : self.pos]
        if name not in self.env:
            self.pos = start
            self.error(f"unknown variable {name!r}")
        return name


def parse_poly(text: str, env: VarEnv) -> Polynomial:
    """Parse an infix expression over env with +, -, *, ^ and parentheses."""
    return _Parser(text, env).parse()
