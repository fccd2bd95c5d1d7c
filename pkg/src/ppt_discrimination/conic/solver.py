"""Primal-dual interior-point solver for block SDPs and LPs

The solver works on the real form of a ConicProblem: complex PSD blocks are real symmetric matrices
of doubled order, diagonal blocks are nonnegative vectors. Internally it minimizes ⟨c, X⟩ with
c = −C, so the multipliers it iterates on are the negated dual multipliers of the maximization.

Each iteration solves the HKM Newton system through its Schur complement, with a Mehrotra
predictor-corrector step.
"""

import logging
from dataclasses import dataclass
from typing import Final

import numpy as np
import numpy.typing as npt
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from ppt_discrimination.constants import (
    CHAIN_TOL,
    MAX_RECOVERIES,
    PSD_TOL,
    SCHUR_REGULARIZATION,
    SCHUR_REGULARIZATION_MAX,
)
from ppt_discrimination.conic.embedding import real_embed, real_unembed
from ppt_discrimination.conic.exceptions import ConicProblemError
from ppt_discrimination.conic.models import (
    BlockKind,
    ConicProblem,
    ConicSolution,
    Residuals,
    SolveOptions,
    SolveStatus,
)
from ppt_discrimination.hermlin import max_norm, min_eigenvalue

__all__ = ["check_solution", "solve", "solve_lp", "SolutionCheck"]

logger = logging.getLogger("conic")

# LP problems with more rows than this factor the Schur complement as a sparse matrix.
SPARSE_SCHUR_ROWS: Final = 1500

MIN_STEP: Final = 1e-10

# Halvings of a step whose new iterate does not factor.
MAX_BACKTRACKS: Final = 8

GATHER_MAX_ENTRIES: Final = 8

Array = npt.NDArray[np.float64]


class _NumericalFailure(Exception):
    pass


@dataclass
class _Iterate:
    x: list[Array]
    s: list[Array]
    y: Array

    def copy(self) -> "_Iterate":
        return _Iterate([v.copy() for v in self.x], [v.copy() for v in self.s], self.y.copy())


@dataclass(frozen=True)
class SolutionCheck:
    primal_value: float
    dual_value: float
    gap: float
    residuals: Residuals


def _relative_gap(primal: float, dual: float) -> float:
    return abs(primal - dual) / (1 + abs(primal) + abs(dual))


@dataclass
class _BlockRows:
    """Constraint rows touching one PSD block

    Rows touching at most GATHER_MAX_ENTRIES entries of the block are kept as padded index arrays,
    the others as dense matrices.
    """

    rows: npt.NDArray[np.intp]
    sub: sp.csr_matrix
    sparse_pos: npt.NDArray[np.intp]
    dense_pos: npt.NDArray[np.intp]
    gather_a: npt.NDArray[np.intp]
    gather_b: npt.NDArray[np.intp]
    gather_v: Array
    dense: Array

    @classmethod
    def from_constraints(cls, a: sp.csr_matrix, n: int) -> "_BlockRows":
        rows = np.unique(a.nonzero()[0])
        sub = a[rows]
        counts = np.diff(sub.indptr)
        sparse_pos = np.flatnonzero(counts <= GATHER_MAX_ENTRIES)
        dense_pos = np.flatnonzero(counts > GATHER_MAX_ENTRIES)
        sub_s = sub[sparse_pos]
        counts_s = np.diff(sub_s.indptr)
        width = int(counts_s.max()) if counts_s.size else 0
        gather_a = np.zeros((sparse_pos.size, width), dtype=np.intp)
        gather_b = np.zeros((sparse_pos.size, width), dtype=np.intp)
        gather_v = np.zeros((sparse_pos.size, width))
        slot = np.arange(sub_s.nnz) - np.repeat(sub_s.indptr[:-1], counts_s)
        owner = np.repeat(np.arange(sparse_pos.size), counts_s)
        gather_a[owner, slot], gather_b[owner, slot] = np.divmod(sub_s.indices, n)
        gather_v[owner, slot] = sub_s.data
        dense = sub[dense_pos].toarray().reshape(dense_pos.size, n, n)
        return cls(rows, sub, sparse_pos, dense_pos, gather_a, gather_b, gather_v, dense)

    def schur(self, x: Array, sinv: Array) -> Array:
        """⟨A_i, X·A_j·S⁻¹⟩ over the rows touching the block"""
        r = self.rows.size
        out = np.zeros((r, r))
        sp_pos, dn_pos = self.sparse_pos, self.dense_pos
        if sp_pos.size:
            block = np.zeros((sp_pos.size, sp_pos.size))
            width = self.gather_v.shape[1]
            for e in range(width):
                ae, be, ve = self.gather_a[:, e], self.gather_b[:, e], self.gather_v[:, e]
                for f in range(width):
                    af, bf, vf = self.gather_a[:, f], self.gather_b[:, f], self.gather_v[:, f]
                    block += np.outer(ve, vf) * x[np.ix_(ae, af)] * sinv[np.ix_(be, bf)]
            out[np.ix_(sp_pos, sp_pos)] = block
        if dn_pos.size:
            n = x.shape[0]
            weighted = (x @ self.dense @ sinv).reshape(dn_pos.size, n * n)
            cross = np.asarray(self.sub @ weighted.T)
            out[:, dn_pos] += cross
            out[np.ix_(dn_pos, sp_pos)] += cross[sp_pos].T
        return out


class _Kernel:
    """Linear algebra of one problem in the solver's real form"""

    def __init__(self, problem: ConicProblem) -> None:
        self.problem = problem
        self.blocks = problem.blocks
        self.a = problem.constraints
        self.at = [a.T.tocsr() for a in problem.constraints]
        self.b = problem.rhs
        self.c = [-c for c in problem.objective]
        self.nu = sum(block.embedded_order for block in self.blocks)
        self.b_norm = float(np.linalg.norm(self.b))
        self.c_norm = float(np.sqrt(sum(np.sum(c * c) for c in self.c)))
        self.psd_rows = {
            i: _BlockRows.from_constraints(a, block.embedded_order)
            for i, (block, a) in enumerate(zip(self.blocks, self.a))
            if block.kind is BlockKind.PSD_COMPLEX
        }

    def is_psd(self, i: int) -> bool:
        return self.blocks[i].kind is BlockKind.PSD_COMPLEX

    def apply(self, x: list[Array]) -> Array:
        out = np.zeros(self.problem.m)
        for a, xb in zip(self.a, x):
            out += a @ xb.reshape(-1)
        return out

    def adjoint(self, y: Array) -> list[Array]:
        result = []
        for i, at in enumerate(self.at):
            v = at @ y
            if self.is_psd(i):
                n = self.blocks[i].embedded_order
                v = v.reshape(n, n)
                v = (v + v.T) / 2
            result.append(v)
        return result

    def inner(self, u: list[Array], v: list[Array]) -> float:
        return float(sum(np.sum(ub * vb) for ub, vb in zip(u, v)))

    def identity(self) -> list[Array]:
        return [
            np.eye(block.embedded_order) if self.is_psd(i) else np.ones(block.order)
            for i, block in enumerate(self.blocks)
        ]


def _initial_point(kernel: _Kernel) -> _Iterate:
    ident = kernel.identity()
    a_ident = kernel.apply(ident)
    denom = float(a_ident @ a_ident)
    tau = float(a_ident @ kernel.b) / denom if denom > 0 else 1.0
    if not np.isfinite(tau) or tau <= 0:
        tau = 1.0
    return _Iterate(
        x=[tau * e for e in ident],
        s=[e.copy() for e in kernel.identity()],
        y=np.zeros(kernel.problem.m),
    )


def _max_step(kernel: _Kernel, i: int, v: Array, dv: Array) -> float:
    """Largest α with v + α·dv still in the cone of block i"""
    if kernel.is_psd(i):
        try:
            chol = la.cholesky(v, lower=True)
        except la.LinAlgError:
            raise _NumericalFailure("iterate left the cone") from None
        tmp = la.solve_triangular(chol, dv, lower=True)
        scaled = la.solve_triangular(chol, tmp.T, lower=True)
        lam = float(np.linalg.eigvalsh((scaled + scaled.T) / 2)[0])
    else:
        ratios = dv / v
        lam = float(ratios.min())
    return np.inf if lam >= 0 else -1.0 / lam


class _SchurSystem:
    def __init__(self, kernel: _Kernel, it: _Iterate) -> None:
        self.kernel = kernel
        self.sinv: list[Array] = []
        for i, s in enumerate(it.s):
            if kernel.is_psd(i):
                try:
                    factor = la.cho_factor(s, lower=True)
                except la.LinAlgError:
                    raise _NumericalFailure("dual slack is not positive definite") from None
                inv = la.cho_solve(factor, np.eye(s.shape[0]))
                self.sinv.append((inv + inv.T) / 2)
            else:
                self.sinv.append(1.0 / s)
        self.x = it.x
        m = kernel.problem.m
        self.sparse = kernel.problem.is_lp and m > SPARSE_SCHUR_ROWS
        if self.sparse:
            self._factor_sparse()
        else:
            self._factor_dense()

    def _dense_matrix(self) -> Array:
        k = self.kernel
        m = k.problem.m
        schur = np.zeros((m, m))
        for i, a in enumerate(k.a):
            if k.is_psd(i):
                block_rows = k.psd_rows[i]
                if block_rows.rows.size:
                    rows = block_rows.rows
                    schur[np.ix_(rows, rows)] += block_rows.schur(self.x[i], self.sinv[i])
            else:
                d = self.x[i] * self.sinv[i]
                schur += (a.multiply(d) @ a.T).toarray()
        return (schur + schur.T) / 2

    def _factor_dense(self) -> None:
        schur = self._dense_matrix()
        scale = max(float(np.max(np.diag(schur))), 1e-300)
        reg = SCHUR_REGULARIZATION
        while reg <= SCHUR_REGULARIZATION_MAX:
            try:
                self._cho = la.cho_factor(schur + reg * scale * np.eye(schur.shape[0]))
                return
            except la.LinAlgError:
                logger.debug("Schur complement not positive definite, regularization %.0e", reg)
                reg *= 100
        raise _NumericalFailure("Schur complement is not positive definite")

    def _factor_sparse(self) -> None:
        k = self.kernel
        m = k.problem.m
        schur = sp.csr_matrix((m, m))
        for i, a in enumerate(k.a):
            d = self.x[i] * self.sinv[i]
            schur = schur + a.multiply(d) @ a.T
        schur = ((schur + schur.T) / 2).tocsc()
        scale = max(float(schur.diagonal().max()), 1e-300)
        reg = SCHUR_REGULARIZATION
        while reg <= SCHUR_REGULARIZATION_MAX:
            try:
                self._lu = spla.splu((schur + reg * scale * sp.identity(m)).tocsc())
                return
            except RuntimeError:
                logger.debug("Sparse Schur complement is singular, regularization %.0e", reg)
                reg *= 100
        raise _NumericalFailure("Schur complement is singular")

    def solve(self, rhs: Array) -> Array:
        out = self._lu.solve(rhs) if self.sparse else la.cho_solve(self._cho, rhs)
        if not np.all(np.isfinite(out)):
            raise _NumericalFailure("Schur complement solve produced non-finite values")
        return out

    def direction(
        self, rp: Array, rd: list[Array], g: list[Array]
    ) -> tuple[list[Array], Array, list[Array]]:
        k = self.kernel
        w = []
        for i in range(len(k.blocks)):
            if k.is_psd(i):
                w.append(self.x[i] @ rd[i] @ self.sinv[i] - g[i])
            else:
                w.append(self.x[i] * rd[i] * self.sinv[i] - g[i])
        dy = self.solve(rp + k.apply(w))
        aty = k.adjoint(dy)
        ds = [rdb - ab for rdb, ab in zip(rd, aty)]
        dx = []
        for i in range(len(k.blocks)):
            if k.is_psd(i):
                v = g[i] - self.x[i] @ ds[i] @ self.sinv[i]
                dx.append((v + v.T) / 2)
            else:
                dx.append(g[i] - self.x[i] * ds[i] * self.sinv[i])
        return dx, dy, ds


def _steps(kernel: _Kernel, it: _Iterate, dx, ds, fraction: float) -> tuple[float, float]:
    ap = min(_max_step(kernel, i, it.x[i], dx[i]) for i in range(len(dx)))
    ad = min(_max_step(kernel, i, it.s[i], ds[i]) for i in range(len(ds)))
    return min(1.0, fraction * ap), min(1.0, fraction * ad)


@dataclass
class _Metrics:
    primal: float
    dual: float
    gap: float
    pinf: float
    dinf: float
    mu: float

    @property
    def merit(self) -> float:
        return max(self.gap, self.pinf, self.dinf)


def _residuals(kernel: _Kernel, it: _Iterate) -> tuple[Array, list[Array]]:
    rp = kernel.b - kernel.apply(it.x)
    aty = kernel.adjoint(it.y)
    rd = [c - s - a for c, s, a in zip(kernel.c, it.s, aty)]
    return rp, rd


def _metrics(kernel: _Kernel, it: _Iterate, rp: Array, rd: list[Array]) -> _Metrics:
    # values of the maximization problem
    primal = -kernel.inner(kernel.c, it.x)
    dual = -float(kernel.b @ it.y)
    rd_norm = float(np.sqrt(sum(np.sum(r * r) for r in rd)))
    return _Metrics(
        primal=primal,
        dual=dual,
        gap=_relative_gap(primal, dual),
        pinf=float(np.linalg.norm(rp)) / (1 + kernel.b_norm),
        dinf=rd_norm / (1 + kernel.c_norm),
        mu=kernel.inner(it.x, it.s) / kernel.nu,
    )


def _converged(m: _Metrics, opts: SolveOptions) -> bool:
    return m.gap <= opts.tol_gap and m.pinf <= opts.tol_feas and m.dinf <= opts.tol_feas


def _in_cone(kernel: _Kernel, it: _Iterate) -> bool:
    """Whether every primal and slack block is strictly inside its cone"""
    for i in range(len(kernel.blocks)):
        for v in (it.x[i], it.s[i]):
            if not np.all(np.isfinite(v)):
                return False
            if kernel.is_psd(i):
                try:
                    la.cholesky(v, lower=True)
                except la.LinAlgError:
                    return False
            elif not np.all(v > 0):
                return False
    return True


def _advance(
    kernel: _Kernel, it: _Iterate, dx, dy: Array, ds, ap: float, ad: float
) -> _Iterate:
    """Take the step, halving it until the new iterate factors in every block"""
    for _ in range(MAX_BACKTRACKS):
        candidate = _Iterate(
            x=[x + ap * d for x, d in zip(it.x, dx)],
            s=[s + ad * d for s, d in zip(it.s, ds)],
            y=it.y + ad * dy,
        )
        if _in_cone(kernel, candidate):
            return candidate
        ap, ad = ap / 2, ad / 2
    raise _NumericalFailure("step could not be kept inside the cone")


def _centre(kernel: _Kernel, it: _Iterate, fraction: float) -> _Iterate:
    """Pure centring step towards the central path at the current μ"""
    rp, rd = _residuals(kernel, it)
    mu = kernel.inner(it.x, it.s) / kernel.nu
    schur = _SchurSystem(kernel, it)
    g = [mu * sinv - x for sinv, x in zip(schur.sinv, it.x)]
    dx, dy, ds = schur.direction(rp, rd, g)
    ap, ad = _steps(kernel, it, dx, ds, fraction)
    return _advance(kernel, it, dx, dy, ds, ap, ad)


def _iterate(kernel: _Kernel, opts: SolveOptions) -> tuple[_Iterate, SolveStatus, int]:
    it = _initial_point(kernel)
    best = it.copy()
    best_merit = np.inf
    status = SolveStatus.MAX_ITERATIONS
    iterations = 0
    fraction = opts.step_fraction
    recoveries = 0
    for iterations in range(opts.max_iter + 1):
        rp, rd = _residuals(kernel, it)
        m = _metrics(kernel, it, rp, rd)
        if m.merit < best_merit:
            best, best_merit = it.copy(), m.merit
        if _converged(m, opts):
            status = SolveStatus.OPTIMAL
            break
        if iterations == opts.max_iter:
            break
        if m.pinf <= opts.tol_feas and m.dinf <= opts.tol_feas and m.dual < m.primal - CHAIN_TOL:
            logger.warning(
                "Weak duality violated at iteration %d: primal %.10g, dual %.10g",
                iterations,
                m.primal,
                m.dual,
            )
        try:
            schur = _SchurSystem(kernel, it)
            g = [-x for x in it.x]
            dxa, _, dsa = schur.direction(rp, rd, g)
            apa, ada = _steps(kernel, it, dxa, dsa, 1.0)
            mu_aff = (
                kernel.inner(
                    [x + apa * d for x, d in zip(it.x, dxa)],
                    [s + ada * d for s, d in zip(it.s, dsa)],
                )
                / kernel.nu
            )
            sigma = min(1.0, max(0.0, mu_aff / m.mu) ** 3) if m.mu > 0 else 0.0
            g = []
            for i in range(len(kernel.blocks)):
                sinv = schur.sinv[i]
                if kernel.is_psd(i):
                    g.append(sigma * m.mu * sinv - it.x[i] - dxa[i] @ dsa[i] @ sinv)
                else:
                    g.append(sigma * m.mu * sinv - it.x[i] - dxa[i] * dsa[i] * sinv)
            dx, dy, ds = schur.direction(rp, rd, g)
            ap, ad = _steps(kernel, it, dx, ds, fraction)
            if ap < MIN_STEP and ad < MIN_STEP:
                raise _NumericalFailure("steps stalled")
            logger.debug(
                "iter=%d pobj=%.12e dobj=%.12e gap=%.3e pinf=%.3e dinf=%.3e mu=%.3e "
                "ap=%.4f ad=%.4f",
                iterations,
                m.primal,
                m.dual,
                m.gap,
                m.pinf,
                m.dinf,
                m.mu,
                ap,
                ad,
            )
            it = _advance(kernel, it, dx, dy, ds, ap, ad)
        except _NumericalFailure as e:
            if recoveries == MAX_RECOVERIES:
                logger.warning("Interior-point iteration %d failed: %s", iterations, e)
                status = SolveStatus.NUMERICAL_FAILURE
                break
            recoveries += 1
            fraction /= 2
            logger.info(
                "Interior-point iteration %d failed (%s), re-centring the best iterate with "
                "step fraction %.4g",
                iterations,
                e,
                fraction,
            )
            try:
                it = _centre(kernel, best, fraction)
            except _NumericalFailure:
                it = best.copy()
    if status is SolveStatus.OPTIMAL:
        return it, status, iterations
    return best, status, iterations


def check_solution(
    problem: ConicProblem,
    primal_blocks: list,
    dual_slacks: list,
    multipliers: npt.ArrayLike,
) -> SolutionCheck:
    """Recompute values, gap and residuals of a candidate solution from scratch

    Complex blocks are re-embedded from their Hermitian matrices, so nothing from the solver's
    internal state is reused.
    """
    y = np.asarray(multipliers, dtype=np.float64)
    if y.shape != (problem.m,):
        raise ConicProblemError(f"Expected {problem.m} multipliers, got {y.shape}")
    primal = dual_inf_sq = c_sq = 0.0
    rp = np.array(problem.rhs, dtype=np.float64)
    min_primal = min_dual = np.inf
    for block, c, a, xb, sb in zip(
        problem.blocks, problem.objective, problem.constraints, primal_blocks, dual_slacks
    ):
        if block.kind is BlockKind.PSD_COMPLEX:
            x_real = real_embed(xb)
            s_real = real_embed(sb) / 2
            min_primal = min(min_primal, min_eigenvalue(xb) / max(1.0, max_norm(xb)))
            min_dual = min(min_dual, min_eigenvalue(sb) / max(1.0, max_norm(sb)))
        else:
            x_real = np.asarray(xb, dtype=np.float64)
            s_real = np.asarray(sb, dtype=np.float64)
            min_primal = min(min_primal, float(x_real.min()) / max(1.0, max_norm(x_real)))
            min_dual = min(min_dual, float(s_real.min()) / max(1.0, max_norm(s_real)))
        primal += float(np.sum(c * x_real))
        rp -= a @ x_real.reshape(-1)
        aty = (a.T @ y).reshape(x_real.shape)
        if aty.ndim == 2:
            aty = (aty + aty.T) / 2
        rd = aty - c - s_real
        dual_inf_sq += float(np.sum(rd * rd))
        c_sq += float(np.sum(c * c))
    dual = float(problem.rhs @ y)
    residuals = Residuals(
        primal_infeasibility=float(np.linalg.norm(rp)) / (1 + float(np.linalg.norm(problem.rhs))),
        dual_infeasibility=float(np.sqrt(dual_inf_sq)) / (1 + float(np.sqrt(c_sq))),
        min_primal_eigenvalue=float(min_primal),
        min_dual_eigenvalue=float(min_dual),
    )
    return SolutionCheck(primal, dual, _relative_gap(primal, dual), residuals)


def _export(problem: ConicProblem, it: _Iterate) -> tuple[list, list, Array]:
    primal_blocks, slacks = [], []
    for block, x, s in zip(problem.blocks, it.x, it.s):
        if block.kind is BlockKind.PSD_COMPLEX:
            primal_blocks.append(real_unembed(x))
            slacks.append(2 * real_unembed(s))
        else:
            primal_blocks.append(x.copy())
            slacks.append(s.copy())
    return primal_blocks, slacks, -it.y


def _within(check: SolutionCheck, tol_gap: float, tol_feas: float) -> bool:
    res = check.residuals
    return (
        check.gap <= tol_gap
        and res.primal_infeasibility <= tol_feas
        and res.dual_infeasibility <= tol_feas
        and res.min_primal_eigenvalue >= -PSD_TOL
        and res.min_dual_eigenvalue >= -PSD_TOL
    )


def solve(problem: ConicProblem, opts: SolveOptions | None = None) -> ConicSolution:
    """Solve a ConicProblem to the requested tolerances

    A non-optimal outcome is reported through the solution status, never raised. An optimal status
    is only kept when an independent recomputation of gap, residuals and cone membership agrees.

    When the iteration stalls, the best iterate is still accepted with status NEAR_OPTIMAL if the
    recomputation meets the gap and feasibility tolerances multiplied by opts.relaxed_factor.
    """
    opts = opts or SolveOptions()
    kernel = _Kernel(problem)
    logger.debug(
        "Solving conic problem with %d blocks and %d rows", len(problem.blocks), problem.m
    )
    it, status, iterations = _iterate(kernel, opts)
    primal_blocks, slacks, y = _export(problem, it)
    check = check_solution(problem, primal_blocks, slacks, y)
    res = check.residuals
    if status is SolveStatus.OPTIMAL and not _within(check, opts.tol_gap, opts.tol_feas):
        logger.warning("Independent check rejected the solver's optimal iterate: %r", check)
        status = SolveStatus.NUMERICAL_FAILURE
    if status is not SolveStatus.OPTIMAL and _within(
        check, opts.relaxed_factor * opts.tol_gap, opts.relaxed_factor * opts.tol_feas
    ):
        logger.warning(
            "Accepting the best iterate after %s: gap %.3e, primal infeasibility %.3e, "
            "dual infeasibility %.3e are within %g times the tolerances",
            status,
            check.gap,
            res.primal_infeasibility,
            res.dual_infeasibility,
            opts.relaxed_factor,
        )
        status = SolveStatus.NEAR_OPTIMAL
    logger.info(
        "Conic solve finished: status=%s value=%.12g gap=%.3e iterations=%d",
        status,
        check.primal_value,
        check.gap,
        iterations,
    )
    return ConicSolution(
        status=status,
        primal_blocks=primal_blocks,
        dual_multipliers=y,
        dual_slacks=slacks,
        primal_value=check.primal_value,
        dual_value=check.dual_value,
        gap=check.gap,
        residuals=res,
        iterations=iterations,
        problem=problem,
    )


def solve_lp(problem: ConicProblem, opts: SolveOptions | None = None) -> ConicSolution:
    """Solve a problem made only of nonnegative diagonal blocks"""
    if not problem.is_lp:
        raise ConicProblemError("solve_lp needs a problem with diagonal blocks only")
    return solve(problem, opts)
