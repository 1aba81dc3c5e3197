"""Block-diagonal semidefinite programming in primal standard form.

    minimize    <C, X>
    subject to  <A_j, X> = b_j   (j = 1..m),   X >= 0 (PSD, blockwise)

with the dual

    maximize    b' y
    subject to  sum_j y_j A_j + S = C,   S >= 0.

The solver is an infeasible-start primal-dual path-following method: it keeps
X, S strictly positive definite, takes damped Newton steps toward the
perturbed complementarity condition X S = sigma*mu*I, and drives primal/dual
feasibility residuals and the complementarity gap to zero simultaneously.
Dense linear algebra only; block sizes here are desk-scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np


class SdpError(ValueError):
    """Malformed SDP data."""


# ---------------------------------------------------------------------------
# Matrix types
# ---------------------------------------------------------------------------


class SymMatrix:
    """Real symmetric matrix; symmetrized and validated at construction."""

    __slots__ = ("dim", "_a")

    def __init__(self, array):
        a = np.asarray(array, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise SdpError(f"expected a square matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise SdpError("matrix entries must be finite")
        self._a = (a + a.T) / 2.0
        self.dim = a.shape[0]

    def full(self) -> np.ndarray:
        return self._a.copy()

    @property
    def entries(self) -> np.ndarray:
        """Dense lower-triangle storage (row-major packed)."""
        return self._a[np.tril_indices(self.dim)]

    def __repr__(self):
        return f"SymMatrix(dim={self.dim})"


class BlockMatrix:
    """Ordered list of symmetric blocks; inner product and PSD-ness blockwise."""

    __slots__ = ("blocks",)

    def __init__(self, blocks: Iterable[SymMatrix]):
        self.blocks = tuple(blocks)

    @classmethod
    def from_dense(cls, arrays: Iterable) -> "BlockMatrix":
        return cls(SymMatrix(a) for a in arrays)

    @classmethod
    def identity(cls, dims: Sequence[int]) -> "BlockMatrix":
        return cls(SymMatrix(np.eye(d)) for d in dims)

    @classmethod
    def zeros(cls, dims: Sequence[int]) -> "BlockMatrix":
        return cls(SymMatrix(np.zeros((d, d))) for d in dims)

    @property
    def dims(self) -> Tuple[int, ...]:
        return tuple(b.dim for b in self.blocks)

    def arrays(self) -> List[np.ndarray]:
        return [b.full() for b in self.blocks]

    def min_eigenvalue(self) -> float:
        return min(min_eigenvalue(b) for b in self.blocks)

    def max_abs(self) -> float:
        return max((float(np.max(np.abs(b._a))) if b.dim else 0.0) for b in self.blocks)

    def __iter__(self):
        return iter(self.blocks)

    def __len__(self):
        return len(self.blocks)


def inner(a: BlockMatrix, b: BlockMatrix) -> float:
    """Blockwise trace inner product sum_k "Tr(A_k' B_k)"."""
    if a.dims != b.dims:
        raise SdpError(f"block dims differ: {a.dims} vs {b.dims}")
    return float(sum(np.tensordot(x._a, y._a) for x, y in zip(a.blocks, b.blocks)))


def min_eigenvalue(m: SymMatrix) -> float:
    """Smallest eigenvalue (PSD test: M >= 0 iff this is >= 0)."""
    if m.dim == 0:
        return 0.0
    return float(np.linalg.eigvalsh(m._a)[0])


def psd_factor(m: SymMatrix, tol: float) -> List[Tuple[float, np.ndarray]]:
    """Spectral factorization M = sum_i w_i v_i v_i' with w_i >= 0.

    Requires M to be PSD up to -tol*max(1, |M|_inf); eigenvalues in that
    negative band are clamped to zero and dropped.
    """
    scale = max(1.0, float(np.max(np.abs(m._a))) if m.dim else 0.0)
    w, v = np.linalg.eigh(m._a)
    if w[0] < -tol * scale:
        raise SdpError(
            f"matrix is not PSD within tolerance: min eigenvalue {w[0]:.3e} "
            f"< {-tol * scale:.3e}"
        )
    out = []
    for i in range(m.dim):
        weight = float(w[i])
        if weight <= max(tol * scale * 1e-3, 1e-14 * scale):
            continue
        out.append((weight, v[:, i].copy()))
    return out


# ---------------------------------------------------------------------------
# Problem / solution containers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SdpProblem:
    block_dims: Tuple[int, ...]
    C: BlockMatrix
    A: Tuple[BlockMatrix, ...]
    b: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "block_dims", tuple(self.block_dims))
        object.__setattr__(self, "A", tuple(self.A))
        object.__setattr__(self, "b", np.asarray(self.b, dtype=float))
        if self.C.dims != self.block_dims:
            raise SdpError("objective blocks do not conform to block_dims")
        for a in self.A:
            if a.dims != self.block_dims:
                raise SdpError("constraint blocks do not conform to block_dims")
        if len(self.A) != len(self.b):
            raise SdpError(f"|A| = {len(self.A)} but |b| = {len(self.b)}")

    @property
    def m(self) -> int:
        return len(self.A)


@dataclass
class SolverConfig:
    gap_tol: float = 1e-8
    feas_tol: float = 1e-8
    max_iter: int = 200
    gamma: float = 0.3            # centering reduction: Newton targets gamma*mu
    step_fraction: float = 0.95   # fraction-to-boundary damping
    regularization: float = 1e-10  # diagonal shift for near-singular Newton systems

    def __post_init__(self):
        if not (self.gap_tol > 0 and self.feas_tol > 0):
            raise SdpError("tolerances must be positive")
        if not (0 < self.gamma < 1 and 0 < self.step_fraction < 1):
            raise SdpError("gamma and step_fraction must lie in (0, 1)")


@dataclass
class IterateRecord:
    iteration: int
    mu: float
    primal_obj: float
    dual_obj: float
    primal_residual: float
    dual_residual: float
    min_eig_x: float
    min_eig_s: float
    y_norm1: float = 0.0      # |y|_1 in original row scaling
    x_abs_sum: float = 0.0    # entrywise sum of |X| over all blocks


@dataclass
class SdpSolution:
    status: str  # Optimal | Infeasible | NumericalFailure | IterationLimit
    X: BlockMatrix
    y: np.ndarray
    S: BlockMatrix
    gap: float
    primal_residual: float
    dual_residual: float
    iterations: int
    trace: List[IterateRecord] = field(default_factory=list)
    ray: Optional[np.ndarray] = None  # dual improving ray when Infeasible


# ---------------------------------------------------------------------------
# Presolve: row scaling, zero rows, rank-revealing elimination
# ---------------------------------------------------------------------------


def _flatten_rows(problem: SdpProblem) -> np.ndarray:
    """Rows of the constraint operator as one dense (m, total) matrix."""
    parts = []
    for a in problem.A:
        parts.append(np.concatenate([blk._a.ravel() for blk in a.blocks]))
    if not parts:
        total = sum(d * d for d in problem.block_dims)
        return np.zeros((0, total))
    return np.stack(parts)


def _pivoted_cholesky_rows(g: np.ndarray, tol: float) -> List[int]:
    """Indices of a maximal set of rows with residual pivot above tol (relative)."""
    m = g.shape[0]
    d = g.diagonal().astype(float).copy()
    scale = float(d.max(initial=0.0))
    if scale <= 0.0:
        return []
    cols: List[np.ndarray] = []
    selected: List[int] = []
    active = np.ones(m, dtype=bool)
    for _ in range(m):
        masked = np.where(active, d, -np.inf)
        j = int(np.argmax(masked))
        if masked[j] <= tol * scale:
            break
        col = g[:, j].astype(float).copy()
        for c in cols:
            col -= c * c[j]
        col /= math.sqrt(max(d[j], 1e-300))
        cols.append(col)
        d -= col * col
        active[j] = False
        selected.append(j)
    return sorted(selected)


@dataclass
class _Presolved:
    keep: List[int]
    row_scale: np.ndarray        # per-original-row Frobenius norm
    a_stacks: List[np.ndarray]   # per block: (m_kept, d, d), rows scaled
    b_hat: np.ndarray            # kept rows, scaled
    infeasible_ray: Optional[np.ndarray]  # original-space Farkas ray, if detected


def _presolve(problem: SdpProblem) -> _Presolved:
    m = problem.m
    rows = _flatten_rows(problem)
    norms = np.linalg.norm(rows, axis=1)
    b = problem.b
    bscale = 1.0 + float(np.max(np.abs(b), initial=0.0))

    keep0 = []
    for j in range(m):
        if norms[j] <= 1e-14:
            if abs(b[j]) > 1e-12 * bscale:
                ray = np.zeros(m)
                ray[j] = math.copysign(1.0, b[j])
                return _Presolved([], norms, [], np.zeros(0), ray)
            continue  # vacuous row
        keep0.append(j)

    scaled = rows[keep0] / norms[keep0, None]
    b_hat0 = b[keep0] / norms[keep0]

    # Rank-revealing elimination of dependent rows (pivot threshold 1e-12).
    gram = scaled @ scaled.T
    sel_local = _pivoted_cholesky_rows(gram, 1e-12)
    if len(sel_local) < len(keep0):
        sel_set = set(sel_local)
        g_ss = gram[np.ix_(sel_local, sel_local)]
        chol = np.linalg.cholesky(g_ss + 1e-14 * np.eye(len(sel_local)))
        for r in range(len(keep0)):
            if r in sel_set:
                continue
            rhs = gram[sel_local, r]
            coeffs = np.linalg.solve(chol.T, np.linalg.solve(chol, rhs))
            gap = b_hat0[r] - float(coeffs @ b_hat0[sel_local])
            if abs(gap) > 1e-9 * (1.0 + float(np.max(np.abs(b_hat0)))):
                # Dependent but inconsistent row: explicit Farkas ray.
                ray = np.zeros(m)
                sign = math.copysign(1.0, gap)
                for c, jloc in zip(coeffs, sel_local):
                    ray[keep0[jloc]] = -sign * c / norms[keep0[jloc]]
                ray[keep0[r]] = sign / norms[keep0[r]]
                return _Presolved([], norms, [], np.zeros(0), ray)
        keep = [keep0[j] for j in sel_local]
    else:
        keep = keep0

    a_stacks = []
    for k, dim in enumerate(problem.block_dims):
        stack = np.empty((len(keep), dim, dim))
        for idx, j in enumerate(keep):
            stack[idx] = problem.A[j].blocks[k]._a / norms[j]
        a_stacks.append(stack)
    b_hat = np.array([b[j] / norms[j] for j in keep])
    return _Presolved(keep, norms, a_stacks, b_hat, None)


# ---------------------------------------------------------------------------
# Interior-point core
# ---------------------------------------------------------------------------


def _op_a(a_stacks, x_blocks) -> np.ndarray:
    m = a_stacks[0].shape[0] if a_stacks else 0
    out = np.zeros(m)
    for stack, x in zip(a_stacks, x_blocks):
        out += stack.reshape(m, -1) @ x.ravel()
    return out


def _op_at(a_stacks, y) -> List[np.ndarray]:
    return [np.tensordot(y, stack, axes=1) for stack in a_stacks]


def _max_step(x: np.ndarray, dx: np.ndarray) -> float:
    """Largest alpha with x + alpha*dx staying PSD (x positive definite).

    Uses the similarity B' dx B with B = V diag(w^-1/2); robust even when x
    is nearly singular (eigenvalues are floored).
    """
    w, v = np.linalg.eigh(x)
    w = np.maximum(w, 1e-300)
    b = v / np.sqrt(w)[None, :]
    m = b.T @ dx @ b
    lam_min = float(np.linalg.eigvalsh((m + m.T) / 2.0)[0])
    if lam_min >= -1e-14:
        return np.inf
    return -1.0 / lam_min


def _chol_with_retries(m_mat: np.ndarray, reg: float):
    scale = max(float(np.trace(m_mat)) / max(1, m_mat.shape[0]), 1.0)
    shift = 0.0
    for attempt in range(4):
        try:
            return np.linalg.cholesky(m_mat + shift * np.eye(m_mat.shape[0]))
        except np.linalg.LinAlgError:
            shift = reg * scale * (100.0**attempt) if shift == 0.0 else shift * 100.0
    return None


def _solve_refined(chol: np.ndarray, m_mat: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Cholesky solve with iterative refinement.

    The Schur systems here get condition numbers around 1/mu, and the lost
    digits land directly in the primal residual; two refinement passes with
    the same factor recover them.
    """
    x = np.linalg.solve(chol.T, np.linalg.solve(chol, rhs))
    for _ in range(2):
        r = rhs - m_mat @ x
        x = x + np.linalg.solve(chol.T, np.linalg.solve(chol, r))
    return x


def _sym_inv(s: np.ndarray) -> np.ndarray:
    """Inverse of a (numerically) positive definite symmetric matrix.

    Eigenvalues are floored at a tiny positive multiple of the largest, so a
    boundary iterate that lost definiteness to rounding still yields a usable
    inverse instead of an exception.
    """
    w, v = np.linalg.eigh(s)
    top = max(float(w[-1]), 1e-300)
    w = np.maximum(w, top * 1e-14)
    return (v / w) @ v.T


def _solve_spd(m_mat: np.ndarray, rhs: np.ndarray, reg: float):
    """Newton-system solve: Cholesky with retries, eigh pseudo-solve fallback.

    Returns None only when the matrix data itself is broken (eigh failure).
    """
    chol = _chol_with_retries(m_mat, reg)
    if chol is not None:
        return _solve_refined(chol, m_mat, rhs)
    try:
        w, v = np.linalg.eigh(m_mat)
    except np.linalg.LinAlgError:
        return None
    floor = max(float(w[-1]), 1.0) * 1e-13
    winv = 1.0 / np.maximum(w, floor)
    x = v @ (winv * (v.T @ rhs))
    r = rhs - m_mat @ x
    return x + v @ (winv * (v.T @ r))


def solve(problem: SdpProblem, cfg: SolverConfig | None = None) -> SdpSolution:
    """Infeasible-start primal-dual path following on a block SDP."""
    cfg = cfg or SolverConfig()
    dims = problem.block_dims
    n_total = sum(dims)
    c_blocks = problem.C.arrays()
    b_orig = problem.b
    b_scale = 1.0 + float(np.max(np.abs(b_orig), initial=0.0))
    c_scale = 1.0 + problem.C.max_abs()

    def finish(status, x_blocks, y_full, s_blocks, trace, iters, ray=None):
        xbm = BlockMatrix.from_dense(x_blocks)
        sbm = BlockMatrix.from_dense(s_blocks)
        rp, rd = _original_residuals(problem, x_blocks, y_full, s_blocks)
        gap = float(sum(np.tensordot(x, s) for x, s in zip(x_blocks, s_blocks)))
        return SdpSolution(status, xbm, y_full, sbm, gap, rp, rd, iters, trace, ray)

    pre = _presolve(problem)
    if pre.infeasible_ray is not None:
        return finish("Infeasible", [np.eye(d) for d in dims], np.zeros(problem.m),
                      [np.eye(d) for d in dims], [], 0, ray=pre.infeasible_ray)

    m = len(pre.keep)
    if m == 0:
        # No effective constraints: optimum is X = 0 when C is PSD.
        if problem.C.min_eigenvalue() >= -1e-12 * c_scale:
            zeros = [np.zeros((d, d)) for d in dims]
            return finish("Optimal", zeros, np.zeros(problem.m), c_blocks, [], 0)
        return finish("NumericalFailure", [np.eye(d) for d in dims],
                      np.zeros(problem.m), [np.eye(d) for d in dims], [], 0)

    a_stacks = pre.a_stacks
    b_hat = pre.b_hat

    xi_p = max(10.0, 2.0 * float(np.max(np.abs(b_hat), initial=0.0)))
    xi_d = max(10.0, 2.0 * max(float(np.linalg.norm(c)) for c in c_blocks))
    x_blocks = [xi_p * np.eye(d) for d in dims]
    s_blocks = [xi_d * np.eye(d) for d in dims]
    y = np.zeros(m)

    trace: List[IterateRecord] = []
    stall_count = 0
    frozen_count = 0
    status = "IterationLimit"
    ray = None
    iteration = 0
    best_score = np.inf
    best_point = None  # (x_blocks, y, s_blocks) copies of the best iterate

    for iteration in range(1, cfg.max_iter + 1):
        mu = sum(np.tensordot(x, s) for x, s in zip(x_blocks, s_blocks)) / n_total
        r_p = b_hat - _op_a(a_stacks, x_blocks)
        at_y = _op_at(a_stacks, y)
        r_d = [c - aty - s for c, aty, s in zip(c_blocks, at_y, s_blocks)]

        pobj = float(sum(np.tensordot(c, x) for c, x in zip(c_blocks, x_blocks)))
        dobj = float(y @ b_hat)
        rel_p_rows = np.abs(r_p) * pre.row_scale[pre.keep]
        rel_p = float(np.max(rel_p_rows, initial=0.0)) / b_scale
        rel_d = max(float(np.max(np.abs(rd), initial=0.0)) for rd in r_d) / c_scale
        gap_abs = mu * n_total
        rel_gap = gap_abs / (1.0 + abs(pobj))

        trace.append(
            IterateRecord(
                iteration, float(mu), pobj, dobj,
                rel_p * b_scale, rel_d * c_scale,
                min(float(np.linalg.eigvalsh(x)[0]) for x in x_blocks),
                min(float(np.linalg.eigvalsh(s)[0]) for s in s_blocks),
                float(np.sum(np.abs(y / pre.row_scale[pre.keep]))),
                float(sum(np.sum(np.abs(x)) for x in x_blocks)),
            )
        )

        score = max(rel_p / cfg.feas_tol, rel_d / cfg.feas_tol, rel_gap / cfg.gap_tol)
        if score < best_score:
            best_score = score
            best_point = ([x.copy() for x in x_blocks], y.copy(),
                          [s.copy() for s in s_blocks])

        if score <= 1.0:
            status = "Optimal"
            break

        # Dual improving ray (Farkas certificate of primal infeasibility).
        bty = float(y @ b_hat)
        if bty > 1e-8:
            y_ray = y / bty
            lam = max(
                float(np.linalg.eigvalsh(z)[-1]) for z in _op_at(a_stacks, y_ray)
            )
            if lam <= 1e-9 * (1.0 + float(np.linalg.norm(y_ray, 1))):
                status = "Infeasible"
                ray = np.zeros(problem.m)
                for val, j in zip(y_ray, pre.keep):
                    ray[j] = val / pre.row_scale[j]
                break

        # Stall heuristic: dual objective diverges while primal stays infeasible.
        if dobj > 1.0 / cfg.feas_tol and rel_p > cfg.feas_tol:
            stall_count += 1
            if stall_count >= 20:
                status = "Infeasible"
                break
        else:
            stall_count = 0

        # Newton direction for X S = sigma*mu*I (HKM-style linearization).
        # When complementarity has raced ahead of primal feasibility the
        # Schur system loses the digits needed to fix the residual; hold the
        # center (sigma near 1) until feasibility catches up.
        sigma = cfg.gamma
        if rel_gap < 0.1 * max(rel_p, rel_d):
            sigma = 0.9
        s_inv = [_sym_inv(s) for s in s_blocks]

        schur = np.zeros((m, m))
        for stack, x, si in zip(a_stacks, x_blocks, s_inv):
            t = np.matmul(np.matmul(x, stack), si)
            schur += stack.reshape(m, -1) @ t.reshape(m, -1).T
        schur = (schur + schur.T) / 2.0

        rhs = b_hat - sigma * mu * _op_a(a_stacks, s_inv)
        rhs += _op_a(
            a_stacks,
            [x @ rd @ si for x, rd, si in zip(x_blocks, r_d, s_inv)],
        )
        dy = _solve_spd(schur, rhs, cfg.regularization)
        if dy is None:
            status = "NumericalFailure"
            break

        at_dy = _op_at(a_stacks, dy)
        ds = [rd - atd for rd, atd in zip(r_d, at_dy)]
        ds = [(d + d.T) / 2.0 for d in ds]
        dx = [
            sigma * mu * si - x - (x @ d @ si + si @ d @ x) / 2.0
            for x, d, si in zip(x_blocks, ds, s_inv)
        ]
        dx = [(d + d.T) / 2.0 for d in dx]

        alpha_p = min(1.0, cfg.step_fraction * min(_max_step(x, d) for x, d in zip(x_blocks, dx)))
        alpha_d = min(1.0, cfg.step_fraction * min(_max_step(s, d) for s, d in zip(s_blocks, ds)))

        # Gentle monotonicity guard on mu (well-posed problems stay monotone).
        for _ in range(3):
            x_new = [x + alpha_p * d for x, d in zip(x_blocks, dx)]
            s_new = [s + alpha_d * d for s, d in zip(s_blocks, ds)]
            mu_new = sum(np.tensordot(x, s) for x, s in zip(x_new, s_new)) / n_total
            if mu_new <= mu or alpha_p < 1e-8:
                break
            alpha_p *= 0.5
            alpha_d *= 0.5
        x_blocks = [x + alpha_p * d for x, d in zip(x_blocks, dx)]
        s_blocks = [s + alpha_d * d for s, d in zip(s_blocks, ds)]
        y = y + alpha_d * dy

        # Frozen iterates cannot improve; stop early and report the best seen.
        if max(alpha_p, alpha_d) < 1e-10:
            frozen_count += 1
            if frozen_count >= 5:
                break
        else:
            frozen_count = 0

    if status != "Infeasible" and best_point is not None:
        x_blocks, y, s_blocks = best_point
    y_full = np.zeros(problem.m)
    for val, j in zip(y, pre.keep):
        y_full[j] = val / pre.row_scale[j]
    return finish(status, x_blocks, y_full, s_blocks, trace, iteration, ray=ray)


def _original_residuals(problem: SdpProblem, x_blocks, y_full, s_blocks):
    m = problem.m
    rp = 0.0
    for j in range(m):
        val = sum(
            float(np.tensordot(problem.A[j].blocks[k]._a, x_blocks[k]))
            for k in range(len(problem.block_dims))
        )
        rp = max(rp, abs(val - problem.b[j]))
    rd = 0.0
    for k, dim in enumerate(problem.block_dims):
        acc = problem.C.blocks[k]._a.copy()
        for j in range(m):
            if y_full[j] != 0.0:
                acc -= y_full[j] * problem.A[j].blocks[k]._a
        acc -= s_blocks[k]
        if dim:
            rd = max(rd, float(np.max(np.abs(acc))))
    return rp, rd


# ---------------------------------------------------------------------------
# Feasibility wrapper
# ---------------------------------------------------------------------------


@dataclass
class FeasibilityResult:
    status: str  # Feasible | Infeasible | Unknown
    X: Optional[BlockMatrix]
    solution: SdpSolution


# Iteration budget for feasibility solves.  Well-posed instances settle well
# under this; weakly infeasible ones (a feasible-looking sequence exists only
# in the closure of the cone) exhaust it while chasing the phantom and land
# in Unknown, which callers treat as "no certificate found" - the sound
# direction, since Unknown never asserts nonexistence.
FEASIBILITY_ITER_BUDGET = 64


def feasibility(problem: SdpProblem, cfg: SolverConfig | None = None) -> FeasibilityResult:
    """Decide feasibility of the constraint set by trace minimization.

    Trace optimality is irrelevant for a feasibility certificate, and pushing
    the duality gap to optimization accuracy drives X onto the cone boundary
    where the Newton systems degrade, so the internal solve runs with a loose
    gap tolerance: any interior point matching the constraints at feas_tol is
    a perfectly good witness (and a more interior one extracts more cleanly).
    """
    cfg = cfg or SolverConfig()
    loose = replace(
        cfg,
        gap_tol=max(cfg.gap_tol, 1e-2),
        max_iter=min(cfg.max_iter, FEASIBILITY_ITER_BUDGET),
    )
    trace_obj = BlockMatrix.identity(problem.block_dims)
    posed = SdpProblem(problem.block_dims, trace_obj, problem.A, problem.b)
    sol = solve(posed, loose)
    if sol.status == "Optimal":
        return FeasibilityResult("Feasible", sol.X, sol)
    if sol.status == "Infeasible":
        return FeasibilityResult("Infeasible", None, sol)
    return FeasibilityResult("Unknown", None, sol)


# ---------------------------------------------------------------------------
# Debug dump/load (sparse block text format)
# ---------------------------------------------------------------------------


def dump_problem(problem: SdpProblem) -> str:
    """Serialize to the sparse block text format (upper triangle, 1-based).

    Line 1: m; line 2: number of blocks; line 3: block sizes; line 4: b;
    then one line per nonzero "matno blkno i j value" with matno 0 for C.
    """
    lines = [
        str(problem.m),
        str(len(problem.block_dims)),
        " ".join(str(d) for d in problem.block_dims),
        " ".join(repr(float(v)) for v in problem.b),
    ]

    def emit(matno: int, bm: BlockMatrix):
        for blkno, blk in enumerate(bm.blocks, start=1):
            a = blk._a
            for i in range(blk.dim):
                for j in range(i, blk.dim):
                    if a[i, j] != 0.0:
                        lines.append(
                            f"{matno} {blkno} {i + 1} {j + 1} {float(a[i, j])!r}"
                        )

    emit(0, problem.C)
    for matno, a in enumerate(problem.A, start=1):
        emit(matno, a)
    return "\n".join(lines) + "\n"


def load_problem(text: str) -> SdpProblem:
    """Parse the sparse block text format produced by :func:`dump_problem`."""
    raw = [ln for ln in (s.strip() for s in text.splitlines()) if ln]
    if len(raw) < 4:
        raise SdpError("truncated SDP dump")
    m = int(raw[0])
    nblocks = int(raw[1])
    dims = tuple(int(t) for t in raw[2].split())
    if len(dims) != nblocks:
        raise SdpError("block size line does not match block count")
    b = np.array([float(t) for t in raw[3].split()])
    if len(b) != m:
        raise SdpError("b vector length does not match m")
    mats = [[np.zeros((d, d)) for d in dims] for _ in range(m + 1)]
    for ln in raw[4:]:
        parts = ln.split()
        if len(parts) != 5:
            raise SdpError(f"bad entry line: {ln!r}")
        matno, blkno, i, j = (int(t) for t in parts[:4])
        val = float(parts[4])
        if not (0 <= matno <= m and 1 <= blkno <= nblocks):
            raise SdpError(f"entry indices out of range: {ln!r}")
        if not (1 <= i <= j <= dims[blkno - 1]):
            raise SdpError(f"not an upper-triangle entry: {ln!r}")
        mats[matno][blkno - 1][i - 1, j - 1] = val
        mats[matno][blkno - 1][j - 1, i - 1] = val
    c = BlockMatrix.from_dense(mats[0])
    a = tuple(BlockMatrix.from_dense(mk) for mk in mats[1:])
    return SdpProblem(dims, c, a, b)
