"""Command-line front end: interpolate, check, info, bench."""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple

from . import benchmarks as bench_data
from .certgen import CertConfig
from .interp import (
    ArchimedeanPreconditionError,
    Interpolant,
    InterpError,
    combine_interpolants,
    rsn_interpolants,
    sn_interpolants_escalate,
)
from .poly import PolyError
from .problemfile import (
    ProblemFile,
    ProblemFileError,
    load_problem_file,
    parse_interpolant_text,
)
from .sas import SAS, HarmonizeError, SasError, harmonize_variables
from .sdp import SolverConfig
from .validate import ValidationConfig, ValidationError, check_separation

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_WARN = 1
EXIT_NULL = 2
EXIT_FAIL = 3
EXIT_PARSE = 64
EXIT_PRECONDITION = 65

_OPTION_DEFAULTS = {
    "mode": "auto",
    "degree": 2,
    "max_degree": 8,
    "gap_tol": 1e-8,
    "feas_tol": 1e-8,
    "samples": 10_000,
    "seed": 42,
    "margin": 0.1,
    "precision": 2,
    "parallel": 1,
}


def _merge_options(pf: ProblemFile, args) -> Dict[str, object]:
    opts = dict(_OPTION_DEFAULTS)
    for key, value in pf.options.items():
        if key in opts:
            opts[key] = value
    for key in opts:
        cli_value = getattr(args, key, None)
        if cli_value is not None:
            opts[key] = cli_value
    return opts


def _cert_config(opts, dump_prefix: Optional[str]) -> CertConfig:
    solver = SolverConfig(gap_tol=float(opts["gap_tol"]), feas_tol=float(opts["feas_tol"]))
    return CertConfig(solver=solver, dump_prefix=dump_prefix)


def _derive_box_from_bounds(t1: SAS, t2: SAS) -> Optional[Dict[str, Tuple[float, float]]]:
    """Per-variable intervals read off affine bound constraints, if complete."""
    env = t1.env
    lo = {n: None for n in env.names}
    hi = {n: None for n in env.names}
    for p in (*t1.geqs, *t2.geqs):
        linear = None
        const = 0.0
        ok = True
        for mono, coeff in p.terms.items():
            deg = sum(mono)
            if deg == 0:
                const = coeff
            elif deg == 1 and linear is None:
                linear = (mono.index(1), coeff)
            else:
                ok = False
                break
        if not ok or linear is None:
            continue
        idx, coeff = linear
        name = env.names[idx]
        bound = -const / coeff
        if coeff > 0:
            lo[name] = bound if lo[name] is None else max(lo[name], bound)
        else:
            hi[name] = bound if hi[name] is None else min(hi[name], bound)
    box = {}
    for name in env.names:
        if lo[name] is None or hi[name] is None or not lo[name] < hi[name]:
            return None
        box[name] = (float(lo[name]), float(hi[name]))
    return box


@dataclass
class PairResult:
    t: int
    l: int
    mode: str
    interpolant: Optional[Interpolant]
    report: Optional[object]
    seconds: float
    error: Optional[str] = None


def _run_pair(pf: ProblemFile, t: int, l: int, opts, dump_prefix) -> PairResult:
    start = time.perf_counter()
    t1 = pf.phi.disjuncts[t]
    t2 = pf.psi.disjuncts[l]
    cfg = _cert_config(opts, dump_prefix)
    mode = str(opts["mode"])
    degree = int(opts["degree"])
    max_degree = int(opts["max_degree"])

    found = None
    used_mode = mode
    if mode in ("auto", "archimedean"):
        try:
            found = rsn_interpolants(
                t1, t2, pf.defs, max_degree, cfg, pf.shared, b_start=degree
            )
            used_mode = "archimedean"
        except ArchimedeanPreconditionError:
            if mode == "archimedean":
                raise
            used_mode = "general"
    if used_mode == "general" or (mode == "general"):
        used_mode = "general"
        found = sn_interpolants_escalate(
            t1, t2, pf.defs, degree, max_degree, cfg, pf.shared
        )

    if found is None:
        return PairResult(t, l, used_mode, None, None, time.perf_counter() - start)

    th1, th2 = harmonize_variables(t1, t2, pf.defs, pf.shared)
    box = pf.box or _derive_box_from_bounds(th1, th2)
    if box is None:
        raise ValidationError(
            "no sampling box in the problem file and no derivable variable bounds"
        )
    vcfg = ValidationConfig(
        samples=int(opts["samples"]),
        seed=int(opts["seed"]),
        margin_min=float(opts["margin"]),
        box=box,
    )
    report = check_separation(found, th1, th2, vcfg)
    return PairResult(t, l, used_mode, found, report, time.perf_counter() - start)


def cmd_interpolate(args) -> int:
    try:
        pf = load_problem_file(args.path)
    except ProblemFileError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE

    opts = _merge_options(pf, args)
    pairs = [
        (t, l)
        for t in range(len(pf.phi.disjuncts))
        for l in range(len(pf.psi.disjuncts))
    ]

    def dump_prefix(t, l):
        if args.dump_sdp is None:
            return None
        return f"{args.dump_sdp}_t{t + 1}_l{l + 1}_"

    results: Dict[Tuple[int, int], PairResult] = {}
    try:
        workers = max(1, int(opts["parallel"]))
        if workers > 1 and len(pairs) > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                futs = {
                    (t, l): pool.submit(_run_pair, pf, t, l, opts, dump_prefix(t, l))
                    for t, l in pairs
                }
                for key, fut in futs.items():
                    results[key] = fut.result()
        else:
            for t, l in pairs:
                results[(t, l)] = _run_pair(pf, t, l, opts, dump_prefix(t, l))
    except (ArchimedeanPreconditionError, HarmonizeError, ValidationError, InterpError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION

    precision = int(opts["precision"])
    any_null = any(r.interpolant is None for r in results.values())
    any_fail = any(r.report is not None and r.report.verdict == "Fail" for r in results.values())
    all_pass = all(
        r.report is not None and r.report.verdict == "Pass" for r in results.values()
    )

    out_pairs = []
    for t, l in pairs:
        r = results[(t, l)]
        entry = {
            "t": t + 1,
            "l": l + 1,
            "mode": r.mode,
            "status": "found" if r.interpolant else "null",
            "seconds": round(r.seconds, 4),
        }
        if r.interpolant:
            cert = r.interpolant.certificate
            entry["degree"] = r.interpolant.degree_bound
            entry["interpolant"] = f"{r.interpolant.q.to_string(precision)} > 0"
            entry["residual_norm"] = cert.residual.max_abs_coeff()
            entry["certificate"] = {
                "p0": cert.p0.expand().to_string(precision),
                "p": [s.expand().to_string(precision) for s in cert.p],
                "q": [m.to_string(precision) for m in cert.q],
                "g": cert.g.to_string(precision),
                "worst_gram_eig": cert.worst_gram_eig(),
            }
        if r.report:
            entry["validation"] = r.report.to_dict()
        out_pairs.append(entry)

    formula_text = None
    if not any_null:
        matrix = [
            [results[(t, l)].interpolant for l in range(len(pf.psi.disjuncts))]
            for t in range(len(pf.phi.disjuncts))
        ]
        formula_text = combine_interpolants(matrix).to_string(precision)

    if any_fail:
        code = EXIT_FAIL
    elif any_null:
        code = EXIT_NULL
    elif all_pass:
        code = EXIT_OK
    else:
        code = EXIT_WARN

    if args.report_dir:
        code_dir = _write_reports(args.report_dir, pf, results, pairs, opts)
        log.info("report written to %s", code_dir)

    if args.json:
        print(json.dumps({"pairs": out_pairs, "formula": formula_text, "exit": code}, indent=2))
        return code

    from .certgen import format_certificate

    for entry in out_pairs:
        print(f"-- subproblem (t={entry['t']}, l={entry['l']}) --")
        print(f"  mode: {entry['mode']}")
        r = results[(entry["t"] - 1, entry["l"] - 1)]
        if entry["status"] == "found":
            print(f"  degree bound: {entry['degree']}")
            print(f"  interpolant: {entry['interpolant']}")
            cert_text = format_certificate(r.interpolant.certificate, precision)
            print("  " + cert_text.replace("\n", "\n  "))
        else:
            print("  no certificate up to the degree cap (NULL)")
        if "validation" in entry:
            print("  " + r.report.to_text().replace("\n", "\n  "))
        print(f"  time: {entry['seconds']:.3f} s")
    if formula_text is not None:
        print(f"combined interpolant: {formula_text}")
    print(f"exit: {code}")
    return code


def _write_reports(report_dir, pf, results, pairs, opts) -> str:
    from . import report as report_mod

    os.makedirs(report_dir, exist_ok=True)
    rows = []
    for t, l in pairs:
        r = results[(t, l)]
        th1, th2 = harmonize_variables(
            pf.phi.disjuncts[t], pf.psi.disjuncts[l], pf.defs, pf.shared
        )
        box = pf.box or _derive_box_from_bounds(th1, th2)
        rows.append(
            {
                "t": t + 1,
                "l": l + 1,
                "mode": r.mode,
                "degree": r.interpolant.degree_bound if r.interpolant else "",
                "status": "found" if r.interpolant else "null",
                "verdict": r.report.verdict if r.report else "",
                "residual_norm": (
                    r.interpolant.certificate.residual.max_abs_coeff()
                    if r.interpolant
                    else ""
                ),
                "t1_kept": r.report.t1.kept if r.report else "",
                "t2_kept": r.report.t2.kept if r.report else "",
                "t1_min_q": r.report.t1.min_value if r.report else "",
                "t2_max_q": r.report.t2.max_value if r.report else "",
                "seconds": round(r.seconds, 4),
            }
        )
        if box is not None:
            vcfg = ValidationConfig(
                samples=int(opts["samples"]),
                seed=int(opts["seed"]),
                margin_min=float(opts["margin"]),
                box=box,
            )
            q = r.interpolant.q if r.interpolant else None
            report_mod.write_pair_samples_csv(report_dir, t + 1, l + 1, q, th1, th2, vcfg)
            report_mod.render_pair_figure(report_dir, t + 1, l + 1, q, th1, th2, vcfg)
    report_mod.write_summary_csv(report_dir, rows)
    return report_dir


def cmd_check(args) -> int:
    try:
        pf = load_problem_file(args.problem)
        with open(args.interpolant, "r", encoding="utf-8") as fh:
            text = fh.read()
    except (ProblemFileError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE

    try:
        q = parse_interpolant_text(text, pf.env)
    except ProblemFileError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    eliminated = set(q.variables()) & set(pf.defs.defs)
    if eliminated:
        print(
            f"error: interpolant mentions eliminated variables {sorted(eliminated)}",
            file=sys.stderr,
        )
        return EXIT_PRECONDITION

    opts = _merge_options(pf, args)
    worst = "Pass"
    rank = {"Pass": 0, "MarginWarning": 1, "Fail": 2}
    try:
        for t in range(len(pf.phi.disjuncts)):
            for l in range(len(pf.psi.disjuncts)):
                th1, th2 = harmonize_variables(
                    pf.phi.disjuncts[t], pf.psi.disjuncts[l], pf.defs, pf.shared
                )
                box = pf.box or _derive_box_from_bounds(th1, th2)
                if box is None:
                    raise ValidationError("no sampling box and no derivable bounds")
                vcfg = ValidationConfig(
                    samples=int(opts["samples"]),
                    seed=int(opts["seed"]),
                    margin_min=float(opts["margin"]),
                    box=box,
                )
                report = check_separation(q, th1, th2, vcfg)
                print(f"-- subproblem (t={t + 1}, l={l + 1}) --")
                if args.json:
                    print(json.dumps(report.to_dict(), indent=2))
                else:
                    print("  " + report.to_text().replace("\n", "\n  "))
                if rank[report.verdict] > rank[worst]:
                    worst = report.verdict
    except (HarmonizeError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION

    return {"Pass": EXIT_OK, "MarginWarning": EXIT_WARN, "Fail": EXIT_FAIL}[worst]


def cmd_info(args) -> int:
    try:
        pf = load_problem_file(args.path)
    except ProblemFileError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    opts = _merge_options(pf, args)
    max_degree = int(opts["max_degree"])

    out = []
    for t in range(len(pf.phi.disjuncts)):
        for l in range(len(pf.psi.disjuncts)):
            try:
                th1, th2 = harmonize_variables(
                    pf.phi.disjuncts[t], pf.psi.disjuncts[l], pf.defs, pf.shared
                )
            except HarmonizeError as exc:
                print(f"error: {exc}", file=sys.stderr)
                return EXIT_PRECONDITION
            mentioned = sorted(
                set(th1.variables()) | set(th2.variables()),
                key=pf.env.names.index,
            )
            n = len(mentioned) or 1
            s1, s2 = len(th1.geqs), len(th2.geqs)
            u_eq = len(th1.eqs) + len(th2.eqs)
            # mirror the auto-mode choice: equations rewritten as bound
            # pairs, then no disequalities and a passing bounds check
            from .interp import _rewrite_equations
            from .sas import check_archimedean_form

            rw1, rw2 = _rewrite_equations(th1), _rewrite_equations(th2)
            arch_like = (
                not (th1.neqs or th2.neqs)
                and check_archimedean_form(rw1, rw2).ok
            )
            if arch_like:
                u_blocks = 1 + len(rw1.geqs) + len(rw2.geqs)
                gen_degs = [p.degree() for p in (*rw1.geqs, *rw2.geqs)]
            else:
                u_blocks = 1 + (2**s1 - 1) + (2**s2 - 1) + 2 * u_eq
                gen_degs = [p.degree() for p in (*th1.geqs, *th2.geqs, *th1.eqs, *th2.eqs)]
            max_gen = int(max(gen_degs, default=0))
            rows = []
            for b in range(0, max_degree + 1, 2):
                # synthesis level b maps to certificate bound 2b, i.e. a
                # shared Gram basis of degree b: block size C(n + b, n)
                cert_degree = 2 * b
                size = math.comb(n + cert_degree // 2, n)
                b_total = cert_degree + max_gen
                rows.append(
                    {
                        "b": b,
                        "certificate_degree": cert_degree,
                        "gram_blocks": u_blocks,
                        "block_size": size,
                        "constraint_bound": math.comb(n + b_total, n),
                    }
                )
            out.append(
                {
                    "t": t + 1,
                    "l": l + 1,
                    "variables": mentioned,
                    "mode_guess": "archimedean" if arch_like else "general",
                    "degrees": rows,
                }
            )

    if args.json:
        print(json.dumps(out, indent=2))
        return EXIT_OK
    for entry in out:
        print(f"-- subproblem (t={entry['t']}, l={entry['l']}) --")
        print(f"  variables ({len(entry['variables'])}): {', '.join(entry['variables'])}")
        print(f"  likely mode: {entry['mode_guess']}")
        print("  b   cert_deg  blocks  block_size  constraint_bound")
        for row in entry["degrees"]:
            print(
                f"  {row['b']:<3} {row['certificate_degree']:<8} "
                f"{row['gram_blocks']:<7} {row['block_size']:<11} "
                f"{row['constraint_bound']}"
            )
    return EXIT_OK


def cmd_bench(args) -> int:
    names = args.names or bench_data.list_benchmarks()
    total_start = time.perf_counter()
    failures = 0
    print(f"{'benchmark':<14} {'pairs':<6} {'status':<9} {'verdicts':<16} seconds")
    for name in names:
        path = bench_data.benchmark_path(name)
        ns = argparse.Namespace(
            path=path, json=True, report_dir=None, dump_sdp=None,
            mode=None, degree=None, max_degree=None, gap_tol=None, feas_tol=None,
            samples=None, seed=None, margin=None, precision=None, parallel=None,
        )
        start = time.perf_counter()
        import contextlib, io

        buf = io.StringIO()
        with contextlib.redirect_stdout(buf):
            code = cmd_interpolate(ns)
        elapsed = time.perf_counter() - start
        payload = json.loads(buf.getvalue())
        verdicts = ",".join(
            p.get("validation", {}).get("verdict", "-") for p in payload["pairs"]
        )
        status = "ok" if code in (EXIT_OK, EXIT_WARN) else f"exit {code}"
        if code not in (EXIT_OK, EXIT_WARN):
            failures += 1
        print(f"{name:<14} {len(payload['pairs']):<6} {status:<9} {verdicts:<16} {elapsed:.2f}")
    print(f"total: {time.perf_counter() - total_start:.2f} s")
    return EXIT_OK if failures == 0 else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sosinterp",
        description="Synthesize and check non-linear interpolants for "
        "semi-algebraic systems",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--mode", choices=["auto", "general", "archimedean"], default=None)
        p.add_argument("--degree", type=int, default=None, help="initial even degree bound")
        p.add_argument("--max-degree", dest="max_degree", type=int, default=None)
        p.add_argument("--gap-tol", dest="gap_tol", type=float, default=None)
        p.add_argument("--feas-tol", dest="feas_tol", type=float, default=None)
        p.add_argument("--samples", type=int, default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--margin", type=float, default=None)
        p.add_argument("--precision", type=int, default=None)
        p.add_argument("--json", action="store_true")
        p.add_argument("--parallel", type=int, default=None)

    p_int = sub.add_parser("interpolate", help="synthesize a validated interpolant")
    p_int.add_argument("path")
    add_common(p_int)
    p_int.add_argument("--dump-sdp", dest="dump_sdp", default=None,
                       help="prefix for SDP dumps in the block text format")
    p_int.add_argument("--report-dir", dest="report_dir", default=None,
                       help="write summary.csv, sample CSVs and figures here")
    p_int.set_defaults(func=cmd_interpolate)

    p_chk = sub.add_parser("check", help="validate a given interpolant against a problem")
    p_chk.add_argument("problem")
    p_chk.add_argument("interpolant")
    add_common(p_chk)
    p_chk.set_defaults(func=cmd_check)

    p_inf = sub.add_parser("info", help="predicted SDP dimensions per degree")
    p_inf.add_argument("path")
    add_common(p_inf)
    p_inf.set_defaults(func=cmd_info)

    p_ben = sub.add_parser("bench", help="run the shipped benchmark files")
    p_ben.add_argument("names", nargs="*", help="benchmark names (default: all)")
    p_ben.set_defaults(func=cmd_bench)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (ArchimedeanPreconditionError, HarmonizeError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except (PolyError, SasError, ProblemFileError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


def entry() -> None:
    sys.exit(main())
