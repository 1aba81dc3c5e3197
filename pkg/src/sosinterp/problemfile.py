"""Problem file parsing and serialization.

A problem file is JSON with top-level keys:

    vars     ordered variable names (required)
    phi      first formula (required)
    psi      second formula (required)
    defs     {name: expression} definitional equations for local variables
    box      {name: [lo, hi]} sampling intervals for validation
    options  per-run overrides (mode, degree, max_degree, ...)

phi/psi are written either as a DNF array of constraint-string lists

    [{"geq": ["x"], "neq": [], "eq": ["x^2 - y"]}, ...]

or as an expression tree of {"and": [...]}, {"or": [...]}, {"not": node}
nodes over atom strings "expr REL 0" with REL one of >=, >, <=, <, =, !=.
Every variable not named in defs is treated as shared between the sides.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .poly import Polynomial, PolyParseError, VarEnv, parse_poly
from .sas import (
    SAS,
    And,
    DefEquations,
    Formula,
    Node,
    Not,
    Or,
    SasError,
    dnf_convert,
)


class ProblemFileError(ValueError):
    pass


@dataclass
class ProblemFile:
    env: VarEnv
    phi: Formula
    psi: Formula
    defs: DefEquations
    box: Optional[Dict[str, Tuple[float, float]]]
    options: Dict[str, object] = field(default_factory=dict)

    @property
    def shared(self) -> Tuple[str, ...]:
        defined = set(self.defs.defs)
        return tuple(n for n in self.env.names if n not in defined)


_RELS = (">=", "<=", "!=", ">", "<", "=")


def _parse_atom(text: str, env: VarEnv):
    for rel in _RELS:
        idx = text.find(rel)
        if idx >= 0:
            lhs, rhs = text[:idx], text[idx + len(rel):]
            if rhs.strip() != "0":
                raise ProblemFileError(
                    f"atom {text!r}: right-hand side must be the literal 0"
                )
            try:
                return (parse_poly(lhs, env), rel)
            except PolyParseError as exc:
                raise ProblemFileError(f"atom {text!r}: {exc}") from exc
    raise ProblemFileError(f"atom {text!r} has no relation operator")


def _parse_tree(node, env: VarEnv) -> Node:
    if isinstance(node, str):
        return _parse_atom(node, env)
    if isinstance(node, dict) and len(node) == 1:
        key, value = next(iter(node.items()))
        if key == "and":
            return And(tuple(_parse_tree(c, env) for c in value))
        if key == "or":
            return Or(tuple(_parse_tree(c, env) for c in value))
        if key == "not":
            return Not(_parse_tree(value, env))
    raise ProblemFileError(f"malformed formula node: {node!r}")


def _parse_formula(data, env: VarEnv, label: str) -> Formula:
    if isinstance(data, list):
        disjuncts = []
        for i, entry in enumerate(data):
            if not isinstance(entry, dict):
                raise ProblemFileError(f"{label}[{i}] must be an object")
            unknown = set(entry) - {"geq", "neq", "eq"}
            if unknown:
                raise ProblemFileError(f"{label}[{i}] has unknown keys {sorted(unknown)}")
            try:
                disjuncts.append(
                    SAS.of(
                        env,
                        [parse_poly(s, env) for s in entry.get("geq", [])],
                        [parse_poly(s, env) for s in entry.get("neq", [])],
                        [parse_poly(s, env) for s in entry.get("eq", [])],
                    )
                )
            except (PolyParseError, SasError) as exc:
                raise ProblemFileError(f"{label}[{i}]: {exc}") from exc
        if not disjuncts:
            raise ProblemFileError(f"{label} must have at least one disjunct")
        return Formula(tuple(disjuncts))
    try:
        return dnf_convert(_parse_tree(data, env), env)
    except SasError as exc:
        raise ProblemFileError(f"{label}: {exc}") from exc


def parse_problem(data: dict) -> ProblemFile:
    if not isinstance(data, dict):
        raise ProblemFileError("problem file must be a JSON object")
    try:
        names = data["vars"]
        phi_src = data["phi"]
        psi_src = data["psi"]
    except KeyError as exc:
        raise ProblemFileError(f"missing required key {exc.args[0]!r}") from exc
    if not isinstance(names, list) or not all(isinstance(n, str) for n in names):
        raise ProblemFileError("vars must be a list of names")
    env = VarEnv.of(names)

    defs_src = data.get("defs", {})
    if not isinstance(defs_src, dict):
        raise ProblemFileError("defs must map variable names to expressions")
    defs_map = {}
    for name, expr in defs_src.items():
        if name not in env:
            raise ProblemFileError(f"defs names unknown variable {name!r}")
        try:
            defs_map[name] = parse_poly(expr, env)
        except PolyParseError as exc:
            raise ProblemFileError(f"defs[{name!r}]: {exc}") from exc
    try:
        defs = DefEquations(defs_map)
    except SasError as exc:
        raise ProblemFileError(str(exc)) from exc

    box_src = data.get("box")
    box = None
    if box_src is not None:
        if not isinstance(box_src, dict):
            raise ProblemFileError("box must map variable names to [lo, hi]")
        box = {}
        for name, pair in box_src.items():
            if name not in env:
                raise ProblemFileError(f"box names unknown variable {name!r}")
            if not (isinstance(pair, list) and len(pair) == 2):
                raise ProblemFileError(f"box[{name!r}] must be [lo, hi]")
            lo, hi = float(pair[0]), float(pair[1])
            if not lo < hi:
                raise ProblemFileError(f"box[{name!r}] is empty")
            box[name] = (lo, hi)

    options = data.get("options", {})
    if not isinstance(options, dict):
        raise ProblemFileError("options must be an object")

    phi = _parse_formula(phi_src, env, "phi")
    psi = _parse_formula(psi_src, env, "psi")
    return ProblemFile(env=env, phi=phi, psi=psi, defs=defs, box=box, options=dict(options))


def load_problem_file(path: str) -> ProblemFile:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ProblemFileError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ProblemFileError(f"{path} is not valid JSON: {exc}") from exc
    return parse_problem(data)


def dump_problem(pf: ProblemFile) -> dict:
    """Serialize back to the canonical (DNF-array) JSON form; exact round trip."""

    def formula_out(formula: Formula) -> List[dict]:
        out = []
        for d in formula.disjuncts:
            out.append(
                {
                    "geq": [p.to_string() for p in d.geqs],
                    "neq": [p.to_string() for p in d.neqs],
                    "eq": [p.to_string() for p in d.eqs],
                }
            )
        return out

    data: Dict[str, object] = {
        "vars": list(pf.env.names),
        "phi": formula_out(pf.phi),
        "psi": formula_out(pf.psi),
    }
    if pf.defs:
        data["defs"] = {k: v.to_string() for k, v in pf.defs.defs.items()}
    if pf.box is not None:
        data["box"] = {k: [lo, hi] for k, (lo, hi) in pf.box.items()}
    if pf.options:
        data["options"] = pf.options
    return data


def parse_interpolant_text(text: str, env: VarEnv) -> Polynomial:
    """Parse an interpolant file: one expression, optionally suffixed '> 0'."""
    body = text.strip()
    if body.endswith("> 0"):
        body = body[: -len("> 0")].rstrip()
    if not body:
        raise ProblemFileError("empty interpolant expression")
    try:
        return parse_poly(body, env)
    except PolyParseError as exc:
        raise ProblemFileError(f"interpolant: {exc}") from exc
