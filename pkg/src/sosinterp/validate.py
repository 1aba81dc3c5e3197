"""Independent checking of certificates and interpolants.

Everything here re-derives its verdicts from first principles: residuals are
recomputed symbolically, PSD-ness is re-measured, and separation is probed by
evaluating the interpolant on freshly sampled points of each system.  A Fail
is definitive (a concrete counterexample point is attached); a Pass is strong
evidence, not proof.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .certgen import Certificate, residual as cert_residual
from .interp import Interpolant
from .poly import Polynomial
from .sas import SAS


class ValidationError(ValueError):
    pass


@dataclass
class ValidationConfig:
    samples: int = 10_000       # attempts per side
    seed: int = 42
    margin_min: float = 0.1
    eq_band: float = 1e-6       # |h| tolerance for equation constraints
    neq_band: float = 1e-9      # |g| >= this for disequality constraints
    box: Optional[Dict[str, Tuple[float, float]]] = None


@dataclass
class SideStats:
    attempts: int
    kept: int
    min_value: float
    max_value: float
    worst_point: Optional[Tuple[float, ...]]

    @property
    def acceptance_ratio(self) -> float:
        return self.kept / self.attempts if self.attempts else 0.0


@dataclass
class ValidationReport:
    verdict: str                 # Pass | MarginWarning | Fail
    residual_norm: float
    worst_gram_eig: float
    t1: SideStats
    t2: SideStats
    seed: int
    margin_min: float
    counterexample: Optional[Tuple[float, ...]] = None
    notes: List[str] = field(default_factory=list)

    def to_text(self) -> str:
        lines = [
            f"verdict: {self.verdict}",
            f"  certificate residual |.|_inf: {self.residual_norm:.3e}",
            f"  worst Gram eigenvalue:        {self.worst_gram_eig:.3e}",
            f"  t1 samples: kept {self.t1.kept}/{self.t1.attempts} "
            f"(ratio {self.t1.acceptance_ratio:.3f}), min q = {self.t1.min_value:.4g}",
            f"  t2 samples: kept {self.t2.kept}/{self.t2.attempts} "
            f"(ratio {self.t2.acceptance_ratio:.3f}), max q = {self.t2.max_value:.4g}",
            f"  required margin: {self.margin_min}",
            f"  seed: {self.seed}",
        ]
        if self.counterexample is not None:
            lines.append(f"  counterexample: {self.counterexample}")
        for note in self.notes:
            lines.append(f"  note: {note}")
        lines.append("  (Fail is definitive; Pass is sampling evidence, not proof)")
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "residual_norm": self.residual_norm,
            "worst_gram_eig": self.worst_gram_eig,
            "t1": {
                "attempts": self.t1.attempts,
                "kept": self.t1.kept,
                "min_q": self.t1.min_value,
                "acceptance_ratio": self.t1.acceptance_ratio,
            },
            "t2": {
                "attempts": self.t2.attempts,
                "kept": self.t2.kept,
                "max_q": self.t2.max_value,
                "acceptance_ratio": self.t2.acceptance_ratio,
            },
            "margin_min": self.margin_min,
            "seed": self.seed,
            "counterexample": self.counterexample,
            "notes": list(self.notes),
        }


def check_certificate(cert: Certificate, tol: float) -> Tuple[float, float, bool]:
    """Recompute the identity residual and worst Gram eigenvalue.

    Passes iff |residual|_inf <= tol * (largest summand coefficient) and every
    Gram block has min eigenvalue >= -tol * (its own scale).
    """
    res = cert_residual(cert)
    res_norm = res.max_abs_coeff()
    worst = cert.worst_gram_eig()
    scale = cert.summand_scale()
    gram_scale = max(
        1.0, max(float(np.max(np.abs(s.gram.full()))) for s in cert.gram_blocks())
    )
    ok = res_norm <= tol * scale and worst >= -tol * gram_scale
    return res_norm, worst, ok


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------


def _vectorized_eval(p: Polynomial, pts: np.ndarray) -> np.ndarray:
    """Evaluate p at every row of pts (shape (n, dim))."""
    if not p.terms:
        return np.zeros(len(pts))
    out = np.zeros(len(pts))
    for mono, coeff in p.terms.items():
        term = np.full(len(pts), coeff)
        for i, e in enumerate(mono):
            if e:
                term = term * pts[:, i] ** e
        out += term
    return out


def _gradients(p: Polynomial) -> List[Polynomial]:
    grads = []
    for i in range(len(p.env)):
        terms = {}
        for mono, coeff in p.terms.items():
            if mono[i]:
                new = list(mono)
                new[i] -= 1
                new_t = tuple(new)
                terms[new_t] = terms.get(new_t, 0.0) + coeff * mono[i]
        grads.append(Polynomial(p.env, terms))
    return grads


def _refine_onto_equations(
    pts: np.ndarray, eqs: Sequence[Polynomial], iterations: int = 25
) -> np.ndarray:
    """Gauss-Newton projection of each point toward the equation variety.

    Only a refinement heuristic: the subsequent keep-test still applies the
    stated |h| <= eq_band acceptance band, so this cannot admit bad points.
    """
    if not eqs:
        return pts
    grads = [_gradients(h) for h in eqs]
    pts = pts.copy()
    k = len(eqs)
    for _ in range(iterations):
        vals = np.stack([_vectorized_eval(h, pts) for h in eqs], axis=1)  # (n, k)
        if np.max(np.abs(vals)) < 1e-12:
            break
        jac = np.stack(
            [
                np.stack([_vectorized_eval(g, pts) for g in grow], axis=1)
                for grow in grads
            ],
            axis=1,
        )  # (n, k, dim)
        jjt = jac @ jac.transpose(0, 2, 1)  # (n, k, k)
        jjt += 1e-12 * np.eye(k)
        try:
            lam = np.linalg.solve(jjt, vals[:, :, None])  # (n, k, 1)
        except np.linalg.LinAlgError:
            break
        step = (jac.transpose(0, 2, 1) @ lam)[:, :, 0]  # (n, dim)
        pts = pts - step
    return pts


def sample_sas(
    t: SAS,
    n: int,
    seed: int,
    box: Dict[str, Tuple[float, float]],
    eq_band: float,
    neq_band: float = 1e-9,
) -> Tuple[np.ndarray, int]:
    """Up to n points of t drawn from the box; returns (kept points, attempts).

    Points are drawn uniformly, nudged onto the equation variety when
    equations are present, and kept iff all geqs >= 0, all |eqs| <= eq_band,
    and all |neqs| >= neq_band.  The box must cover every variable the system
    mentions; coordinates of unmentioned variables default to 0.
    """
    env = t.env
    mentioned = set(t.variables())
    missing = [name for name in mentioned if name not in box]
    if missing:
        raise ValidationError(
            f"no sampling box for variables {missing}; supply finite intervals"
        )
    lows = np.array([box.get(name, (0.0, 0.0))[0] for name in env.names], dtype=float)
    highs = np.array([box.get(name, (0.0, 0.0))[1] for name in env.names], dtype=float)
    if not (np.all(np.isfinite(lows)) and np.all(np.isfinite(highs))):
        raise ValidationError("sampling box must be finite")
    rng = np.random.default_rng(seed)
    pts = rng.uniform(lows, highs, size=(n, len(env)))
    pts = _refine_onto_equations(pts, t.eqs)

    keep = np.ones(len(pts), dtype=bool)
    for p in t.geqs:
        keep &= _vectorized_eval(p, pts) >= 0.0
    for h in t.eqs:
        keep &= np.abs(_vectorized_eval(h, pts)) <= eq_band
    for g in t.neqs:
        keep &= np.abs(_vectorized_eval(g, pts)) >= neq_band
    return pts[keep], n


def check_separation(
    interp: "Interpolant | Polynomial",
    t1: SAS,
    t2: SAS,
    cfg: ValidationConfig | None = None,
) -> ValidationReport:
    """Sampled sign check: q > 0 on t1 and q < 0 on t2, with margins.

    Pass needs both margins >= cfg.margin_min; correct signs with a thinner
    margin give MarginWarning; a sign violation gives Fail with the point
    attached.  Zero kept samples on a side downgrades to MarginWarning with
    acceptance-ratio diagnostics.  Accepts a bare polynomial too (externally
    supplied candidates carry no certificate; its stats report as nan).
    """
    cfg = cfg or ValidationConfig()
    if cfg.box is None:
        raise ValidationError("a finite sampling box is required")
    if isinstance(interp, Interpolant):
        q = interp.q
        res_norm, worst_eig, _ = check_certificate(interp.certificate, 1e-6)
    else:
        q = interp
        res_norm, worst_eig = float("nan"), float("nan")
    if t1.env != q.env or t2.env != q.env:
        raise ValidationError("interpolant and systems must share the environment")
    uncovered = set(q.variables()) - set(cfg.box)
    if uncovered:
        raise ValidationError(
            f"sampling box must cover the interpolant's variables; missing {sorted(uncovered)}"
        )

    pts1, att1 = sample_sas(t1, cfg.samples, cfg.seed, cfg.box, cfg.eq_band, cfg.neq_band)
    pts2, att2 = sample_sas(
        t2, cfg.samples, cfg.seed + 1, cfg.box, cfg.eq_band, cfg.neq_band
    )

    notes: List[str] = []
    counterexample = None
    verdict = "Pass"

    min1 = max1 = float("nan")
    min2 = max2 = float("nan")
    worst1 = worst2 = None
    if len(pts1):
        vals1 = _vectorized_eval(q, pts1)
        i_min = int(np.argmin(vals1))
        min1, max1 = float(vals1[i_min]), float(np.max(vals1))
        worst1 = tuple(float(v) for v in pts1[i_min])
    else:
        notes.append("no t1 samples accepted; check the box or the system")
        verdict = "MarginWarning"
    if len(pts2):
        vals2 = _vectorized_eval(q, pts2)
        i_max = int(np.argmax(vals2))
        max2, min2 = float(vals2[i_max]), float(np.min(vals2))
        worst2 = tuple(float(v) for v in pts2[i_max])
    else:
        notes.append("no t2 samples accepted; check the box or the system")
        verdict = "MarginWarning"

    if len(pts1) and min1 <= 0.0:
        verdict = "Fail"
        counterexample = worst1
        notes.append(f"q({worst1}) = {min1:.4g} <= 0 on a t1 sample")
    if len(pts2) and max2 >= 0.0 and verdict != "Fail":
        verdict = "Fail"
        counterexample = worst2
        notes.append(f"q({worst2}) = {max2:.4g} >= 0 on a t2 sample")
    if verdict == "Pass":
        if min1 < cfg.margin_min or max2 > -cfg.margin_min:
            verdict = "MarginWarning"

    return ValidationReport(
        verdict=verdict,
        residual_norm=res_norm,
        worst_gram_eig=worst_eig,
        t1=SideStats(att1, len(pts1), min1, max1, worst1),
        t2=SideStats(att2, len(pts2), min2, max2, worst2),
        seed=cfg.seed,
        margin_min=cfg.margin_min,
        counterexample=counterexample,
        notes=notes,
    )
