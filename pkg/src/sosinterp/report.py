"""Report rendering: delimited summaries plus matplotlib figures.

The CLI's report path writes, per run, a ``summary.csv`` with one row per
subproblem pair, a samples CSV per pair, and a PNG per pair showing the
accepted sample points of both systems (projected to two axes) with the
interpolant's zero level set overlaid when the problem is two-dimensional.
"""

from __future__ import annotations

import csv
import os
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .poly import Polynomial
from .sas import SAS
from .validate import ValidationConfig, _vectorized_eval, sample_sas

SUMMARY_FIELDS = [
    "t", "l", "mode", "degree", "status", "verdict",
    "residual_norm", "t1_kept", "t2_kept", "t1_min_q", "t2_max_q", "seconds",
]


def write_summary_csv(report_dir: str, rows: Sequence[Dict[str, object]]) -> str:
    path = os.path.join(report_dir, "summary.csv")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=SUMMARY_FIELDS)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: row.get(k, "") for k in SUMMARY_FIELDS})
    return path


def _collect_samples(t: SAS, cfg: ValidationConfig, seed: int):
    pts, _ = sample_sas(t, cfg.samples, seed, cfg.box or {}, cfg.eq_band, cfg.neq_band)
    return pts


def write_pair_samples_csv(
    report_dir: str,
    t: int,
    l: int,
    q: Optional[Polynomial],
    t1: SAS,
    t2: SAS,
    cfg: ValidationConfig,
) -> str:
    """Accepted sample points of both sides with the interpolant value."""
    path = os.path.join(report_dir, f"samples_t{t}_l{l}.csv")
    names = list(t1.env.names)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["side", *names, "q"])
        for side, sys, seed in (("t1", t1, cfg.seed), ("t2", t2, cfg.seed + 1)):
            pts = _collect_samples(sys, cfg, seed)
            vals = _vectorized_eval(q, pts) if q is not None and len(pts) else None
            for i in range(len(pts)):
                value = "" if vals is None else repr(float(vals[i]))
                writer.writerow([side, *(repr(float(v)) for v in pts[i]), value])
    return path


def _projection_axes(q: Optional[Polynomial], t1: SAS, t2: SAS) -> Tuple[int, int]:
    """Pick two plot axes: the interpolant's heaviest variables, else the first."""
    env = t1.env
    if len(env) == 1:
        return 0, 0
    weight = np.zeros(len(env))
    polys: List[Polynomial] = []
    if q is not None:
        polys.append(q)
    for sys in (t1, t2):
        polys.extend([*sys.geqs, *sys.neqs, *sys.eqs])
    for p in polys:
        for mono, coeff in p.terms.items():
            for i, e in enumerate(mono):
                if e:
                    weight[i] += abs(coeff)
    order = np.argsort(-weight)
    return int(order[0]), int(order[1])


def render_pair_figure(
    report_dir: str,
    t: int,
    l: int,
    q: Optional[Polynomial],
    t1: SAS,
    t2: SAS,
    cfg: ValidationConfig,
) -> str:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    path = os.path.join(report_dir, f"pair_t{t}_l{l}.png")
    ax_i, ax_j = _projection_axes(q, t1, t2)
    names = t1.env.names

    fig, ax = plt.subplots(figsize=(6.4, 4.8))

    if len(names) == 1:
        # one variable: plot q over the box with samples at their q values
        lo, hi = (cfg.box or {}).get(names[0], (-1.0, 1.0))
        for label, sys, seed, color in (
            ("t1", t1, cfg.seed, "tab:blue"),
            ("t2", t2, cfg.seed + 1, "tab:red"),
        ):
            pts = _collect_samples(sys, cfg, seed)
            if len(pts):
                vals = _vectorized_eval(q, pts) if q is not None else np.zeros(len(pts))
                ax.scatter(pts[:, 0], vals, s=6, alpha=0.5, color=color,
                           label=f"{label} samples ({len(pts)})")
        if q is not None:
            xs = np.linspace(lo, hi, 400)
            grid = xs[:, None]
            ax.plot(xs, _vectorized_eval(q, grid), color="black", linewidth=1.2,
                    label="interpolant q")
            ax.axhline(0.0, color="gray", linewidth=0.8, linestyle="--")
        ax.set_xlabel(names[0])
        ax.set_ylabel("q")
        ax.set_title(f"subproblem ({t}, {l})")
        ax.legend(loc="best", fontsize=8)
        fig.tight_layout()
        fig.savefig(path, dpi=130)
        plt.close(fig)
        return path

    for label, sys, seed, color in (
        ("t1", t1, cfg.seed, "tab:blue"),
        ("t2", t2, cfg.seed + 1, "tab:red"),
    ):
        pts = _collect_samples(sys, cfg, seed)
        if len(pts):
            ax.scatter(
                pts[:, ax_i], pts[:, ax_j], s=6, alpha=0.5, color=color,
                label=f"{label} samples ({len(pts)})",
            )

    # Zero level set of q, drawable when only the two plot axes matter.
    if q is not None and cfg.box:
        used = {q.env.index(name) for name in q.variables()}
        if used <= {ax_i, ax_j} and ax_i != ax_j:
            lo_i, hi_i = cfg.box[names[ax_i]]
            lo_j, hi_j = cfg.box[names[ax_j]]
            gx, gy = np.meshgrid(
                np.linspace(lo_i, hi_i, 160), np.linspace(lo_j, hi_j, 160)
            )
            grid = np.zeros((gx.size, len(names)))
            grid[:, ax_i] = gx.ravel()
            grid[:, ax_j] = gy.ravel()
            gz = _vectorized_eval(q, grid).reshape(gx.shape)
            ax.contour(gx, gy, gz, levels=[0.0], colors="black", linewidths=1.2)
            ax.contourf(gx, gy, gz, levels=[0.0, np.inf], colors=["tab:blue"], alpha=0.08)

    ax.set_xlabel(names[ax_i])
    ax.set_ylabel(names[ax_j])
    ax.set_title(f"subproblem ({t}, {l})")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path
