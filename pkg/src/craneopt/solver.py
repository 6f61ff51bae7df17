"""Primal-dual interior-point solver for sparse equality/bound NLPs.

Solves

    min f(x)   s.t.  c(x) = 0,  lb <= x <= ub

with a monotone barrier loop: for each barrier weight ``mu`` a Newton step on
the perturbed optimality system is computed from the sparse KKT matrix

    [ W + Sigma + dw*I   J^T ] [dx    ]   [ -grad phi_mu ]
    [ J                 -dc*I ] [lam^+ ] = [ -c           ]

followed by fraction-to-the-boundary step limits and a backtracking line
search on an l1 exact-penalty merit function.  Inertia of the KKT matrix is
verified before each solve through the equivalent positive-definiteness test
of ``W + Sigma + dw*I + gamma * J^T J`` (cheap for the block-bidiagonal
Jacobians produced by the transcription); ``dw`` is raised until the test
passes.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

__all__ = [
    "SolverOptions",
    "Multipliers",
    "KktResiduals",
    "SolveReport",
    "solve",
    "kkt_check",
]

# algorithmic constants (textbook values; not exposed as options)
_KAPPA_EPS = 10.0        # inner loop solves each barrier problem to kappa_eps * mu
_TAU_MIN = 0.99          # fraction-to-the-boundary floor
_ARMIJO_ETA = 1e-4
_BACKTRACK = 0.5
_MAX_BACKTRACKS = 30
_KAPPA_SIGMA = 1e10      # multiplier safeguard box
_BOUND_PUSH = 1e-2
_BOUND_RELAX = 1e-8      # interior relaxation of bounds pinned by equalities
_GAMMA_INERTIA = 1e8     # weight of J^T J in the inertia test
_DELTA_C_FIRST = 1e-12   # dual regularization once the factorization fails
_DELTA_W_INIT = 1e-4
_DELTA_W_MAX = 1e12
_MERIT_RHO = 0.5


@dataclass(frozen=True)
class SolverOptions:
    """Tolerances and barrier schedule of the built-in solver."""

    tol: float = 1e-6
    max_iter: int = 3000
    barrier_init: float = 0.1
    barrier_shrink: float = 0.2
    regularization: float = 1e-8

    def __post_init__(self):
        if not self.tol > 0.0:
            raise ValueError("tol must be positive")
        if not 0.0 < self.barrier_shrink < 1.0:
            raise ValueError("barrier_shrink must lie in (0, 1)")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if not self.barrier_init > 0.0:
            raise ValueError("barrier_init must be positive")
        if not self.regularization > 0.0:
            raise ValueError("regularization must be positive")


@dataclass(frozen=True)
class Multipliers:
    """Equality multipliers and lower/upper bound multipliers."""

    eq: np.ndarray
    lower: np.ndarray
    upper: np.ndarray


@dataclass(frozen=True)
class KktResiduals:
    """Unscaled first-order optimality residuals at a candidate point."""

    stationarity: float
    feasibility: float
    complementarity: float
    bound_violation: float

    def worst(self) -> float:
        return max(self.stationarity, self.feasibility,
                   self.complementarity, self.bound_violation)


@dataclass
class SolveReport:
    """Outcome of one solve."""

    status: str                      # converged | max-iter | infeasible | numerical-failure
    objective: float
    kkt_residual: float
    iterations: int
    wall_time: float
    barrier_trace: list = field(default_factory=list)
    iterate_trace: list = field(default_factory=list)   # (mu, |c|_inf, objective)
    multipliers: Multipliers | None = None
    message: str = ""


def _push_interior(x, lb, ub):
    """Move the start point strictly inside its box (standard bound push)."""
    x = np.array(x, dtype=float)
    fl, fu = np.isfinite(lb), np.isfinite(ub)
    both = fl & fu
    with np.errstate(invalid="ignore"):
        pl = np.where(both,
                      np.minimum(_BOUND_PUSH * np.maximum(1.0, np.abs(lb)),
                                 0.5 * _BOUND_PUSH * (ub - lb)),
                      _BOUND_PUSH * np.maximum(1.0, np.abs(lb)))
        pu = np.where(both,
                      np.minimum(_BOUND_PUSH * np.maximum(1.0, np.abs(ub)),
                                 0.5 * _BOUND_PUSH * (ub - lb)),
                      _BOUND_PUSH * np.maximum(1.0, np.abs(ub)))
        lo = np.where(fl, lb + pl, -np.inf)
        hi = np.where(fu, ub - pu, np.inf)
    return np.clip(x, lo, hi)


def _fraction_to_boundary(x, dx, lb, ub, tau):
    """Largest step in (0, 1] keeping x + alpha*dx a tau-fraction inside."""
    alpha = 1.0
    neg = dx < 0.0
    if np.any(neg):
        lim = -tau * (x[neg] - lb[neg]) / dx[neg]
        finite = np.isfinite(lim)
        if np.any(finite):
            alpha = min(alpha, float(np.min(lim[finite])))
    pos = dx > 0.0
    if np.any(pos):
        lim = tau * (ub[pos] - x[pos]) / dx[pos]
        finite = np.isfinite(lim)
        if np.any(finite):
            alpha = min(alpha, float(np.min(lim[finite])))
    return max(alpha, 0.0)


def _dual_step_limit(z, dz, tau):
    mask = dz < 0.0
    if not np.any(mask):
        return 1.0
    return max(min(1.0, float(np.min(-tau * z[mask] / dz[mask]))), 0.0)


class _KktFactors:
    """Inertia-checked factorization of the regularized KKT matrix."""

    def __init__(self, n, m):
        self.n = n
        self.m = m
        self._lu = None

    def factor(self, h_sym, sigma, J, dw, dc):
        m = self.m
        W = (h_sym + sp.diags(sigma + dw)).tocsc()
        M = W if m == 0 else (W + _GAMMA_INERTIA * (J.T @ J)).tocsc()
        if not self._positive_definite(M):
            return False
        K = W if m == 0 else sp.bmat([[W, J.T], [J, -dc * sp.eye(m)]], format="csc")
        try:
            self._lu = spla.splu(K.tocsc())
        except RuntimeError:
            return False
        return True

    @staticmethod
    def _positive_definite(M):
        # Haynsworth: inertia of [[W, J^T], [J, -d*I]] is (n, m, 0) exactly
        # when W + J^T J / d is positive definite; test at a fixed large gamma.
        # The matrix inherits the narrow band of the defect blocks, so prefer
        # a banded Cholesky and fall back to dense for small/unstructured ones.
        coo = M.tocoo()
        if not np.all(np.isfinite(coo.data)):
            return False
        n = M.shape[0]
        bw = int(np.max(np.abs(coo.row - coo.col), initial=0))
        try:
            if n > 128 and bw <= 64:
                band = np.zeros((bw + 1, n))
                low = coo.row >= coo.col
                band[coo.row[low] - coo.col[low], coo.col[low]] = coo.data[low]
                scipy.linalg.cholesky_banded(band, lower=True, check_finite=False)
            else:
                scipy.linalg.cholesky(M.toarray(), lower=True, check_finite=False)
        except scipy.linalg.LinAlgError:
            return False
        return True

    def solve(self, rhs):
        sol = self._lu.solve(rhs)
        return sol[: self.n], sol[self.n:]


def _kkt_residuals(g, c, J, x, lb, ub, mults, mu=0.0) -> KktResiduals:
    stat = g + J.T @ mults.eq - mults.lower + mults.upper
    fl, fu = np.isfinite(lb), np.isfinite(ub)
    comp = 0.0
    if np.any(fl):
        comp = max(comp, float(np.max(np.abs(mults.lower[fl] * (x - lb)[fl] - mu))))
    if np.any(fu):
        comp = max(comp, float(np.max(np.abs(mults.upper[fu] * (ub - x)[fu] - mu))))
    viol = max(
        float(np.max(np.maximum(lb - x, 0.0), initial=0.0)),
        float(np.max(np.maximum(x - ub, 0.0), initial=0.0)),
    )
    return KktResiduals(
        stationarity=float(np.max(np.abs(stat), initial=0.0)),
        feasibility=float(np.max(np.abs(c), initial=0.0)),
        complementarity=comp,
        bound_violation=viol,
    )


def kkt_check(problem, x, multipliers: Multipliers, mu: float = 0.0) -> KktResiduals:
    """First-order residuals for any candidate point, independent of solve()."""
    x = np.asarray(x, dtype=float)
    if x.shape != (problem.n_vars,):
        raise ValueError(f"expected point of length {problem.n_vars}, got {x.shape}")
    if multipliers.eq.shape != (problem.n_eq,):
        raise ValueError(
            f"expected {problem.n_eq} equality multipliers, got {multipliers.eq.shape}"
        )
    if multipliers.lower.shape != x.shape or multipliers.upper.shape != x.shape:
        raise ValueError("bound multiplier length must match the variable count")
    g = problem.gradient(x)
    c = problem.constraints(x)
    J = problem.jacobian(x)
    return _kkt_residuals(g, c, J, x, problem.lb, problem.ub, multipliers, mu=mu)


def _barrier_value(fval, x, lb, ub, fl, fu, mu):
    slack_l = (x - lb)[fl]
    slack_u = (ub - x)[fu]
    if np.any(slack_l <= 0.0) or np.any(slack_u <= 0.0):
        return np.inf
    return fval - mu * (np.sum(np.log(slack_l)) + np.sum(np.log(slack_u)))


def solve(problem, options: SolverOptions | None = None):
    """Run the interior-point iteration; returns ``(solution, SolveReport)``.

    The returned solution satisfies the variable bounds exactly; on
    ``converged`` status all unscaled KKT residuals are at most ``tol``.
    """
    opt = options or SolverOptions()
    t_start = time.perf_counter()
    n, m = problem.n_vars, problem.n_eq
    lb = np.asarray(problem.lb, dtype=float)
    ub = np.asarray(problem.ub, dtype=float)

    def _report(status, x, mults, res, iters, trace, barrier, msg=""):
        return np.clip(x, lb, ub), SolveReport(
            status=status,
            objective=float(problem.objective(np.clip(x, lb, ub))),
            kkt_residual=res.worst() if res is not None else np.inf,
            iterations=iters,
            wall_time=time.perf_counter() - t_start,
            barrier_trace=barrier,
            iterate_trace=trace,
            multipliers=mults,
            message=msg,
        )

    if np.any(lb > ub):
        bad = int(np.argmax(lb > ub))
        empty = Multipliers(np.zeros(m), np.zeros(n), np.zeros(n))
        return _report("infeasible", problem.x0, empty, None, 0, [], [],
                       msg=f"empty bound box at variable {bad}")

    # interior bounds: slightly relaxed so equality-pinned variables that sit
    # exactly on a bound stay representable
    rl = np.where(np.isfinite(lb), lb - _BOUND_RELAX * np.maximum(1.0, np.abs(lb)), -np.inf)
    ru = np.where(np.isfinite(ub), ub + _BOUND_RELAX * np.maximum(1.0, np.abs(ub)), np.inf)
    fl, fu = np.isfinite(rl), np.isfinite(ru)

    x = _push_interior(problem.x0, lb, ub)
    lam = np.zeros(m)
    zl = np.where(fl, 1.0, 0.0)
    zu = np.where(fu, 1.0, 0.0)

    mu = opt.barrier_init
    mu_min = opt.tol / 10.0
    nu = 1.0
    dw_last = 0.0
    factors = _KktFactors(n, m)
    barrier_trace = [mu]
    trace = []
    stall = 0

    fval = problem.objective(x)
    c = problem.constraints(x)
    g = problem.gradient(x)
    J = problem.jacobian(x)

    iters = 0
    status = "max-iter"
    message = ""
    res0 = None
    while iters < opt.max_iter:
        mults = Multipliers(lam, zl, zu)
        res0 = _kkt_residuals(g, c, J, x, rl, ru, mults, mu=0.0)
        trace.append((mu, res0.feasibility, fval))
        if res0.worst() <= opt.tol:
            status = "converged"
            break

        # tighten the barrier once the current subproblem is solved far enough
        res_mu = _kkt_residuals(g, c, J, x, rl, ru, mults, mu=mu)
        while mu > mu_min and res_mu.worst() <= _KAPPA_EPS * mu:
            mu = max(mu_min, opt.barrier_shrink * mu)
            barrier_trace.append(mu)
            res_mu = _kkt_residuals(g, c, J, x, rl, ru, mults, mu=mu)

        slack_l = np.where(fl, x - rl, 1.0)
        slack_u = np.where(fu, ru - x, 1.0)
        sigma = np.where(fl, zl / slack_l, 0.0) + np.where(fu, zu / slack_u, 0.0)
        grad_phi = g - mu * np.where(fl, 1.0 / slack_l, 0.0) \
                     + mu * np.where(fu, 1.0 / slack_u, 0.0)

        H = problem.hessian(x, lam)

        # inertia correction ladder on the primal block
        dw = 0.0 if dw_last == 0.0 else max(opt.regularization, dw_last / 3.0)
        dc = 0.0
        factored = False
        while not factored:
            factored = factors.factor(H, sigma, J, dw, dc)
            if factored:
                break
            if dw == 0.0:
                dw = _DELTA_W_INIT if dw_last == 0.0 else max(opt.regularization, dw_last)
            else:
                dw *= 10.0
            dc = _DELTA_C_FIRST if dc == 0.0 else min(dc * 100.0, 1e-6)
            if dw > _DELTA_W_MAX:
                return _report("numerical-failure", x, mults, res0, iters,
                               trace, barrier_trace,
                               msg="KKT regularization exceeded its ceiling")
        dw_last = dw

        rhs = np.concatenate([-grad_phi, -c])
        dx, lam_new = factors.solve(rhs)
        if not np.all(np.isfinite(dx)):
            return _report("numerical-failure", x, mults, res0, iters,
                           trace, barrier_trace, msg="non-finite Newton step")
        dzl = np.where(fl, (mu - zl * dx) / slack_l - zl, 0.0)
        dzu = np.where(fu, (mu + zu * dx) / slack_u - zu, 0.0)

        tau = max(_TAU_MIN, 1.0 - mu)
        alpha_max = _fraction_to_boundary(x, dx, rl, ru, tau)
        alpha_z = min(_dual_step_limit(zl[fl], dzl[fl], tau) if np.any(fl) else 1.0,
                      _dual_step_limit(zu[fu], dzu[fu], tau) if np.any(fu) else 1.0)

        # exact-penalty weight large enough to make the step a descent direction
        c_l1 = float(np.sum(np.abs(c)))
        slope0 = float(grad_phi @ dx)
        if c_l1 > 1e-14:
            needed = (slope0 + 0.5 * max(0.0, float(dx @ (H @ dx) + (sigma + dw) @ dx**2))) \
                / ((1.0 - _MERIT_RHO) * c_l1)
            if nu < needed:
                nu = needed + 1.0
        merit0 = _barrier_value(fval, x, rl, ru, fl, fu, mu) + nu * c_l1
        slope = slope0 - nu * c_l1

        alpha = alpha_max
        accepted = False
        for _ in range(_MAX_BACKTRACKS):
            x_try = x + alpha * dx
            f_try = problem.objective(x_try)
            c_try = problem.constraints(x_try)
            merit_try = _barrier_value(f_try, x_try, rl, ru, fl, fu, mu) \
                + nu * float(np.sum(np.abs(c_try)))
            if np.isfinite(merit_try) and \
                    merit_try <= merit0 + _ARMIJO_ETA * alpha * min(slope, 0.0):
                accepted = True
                break
            alpha *= _BACKTRACK
        if not accepted:
            # direction unusable: convexify harder and retry from scratch
            dw_last = max(dw_last, _DELTA_W_INIT) * 10.0
            stall += 1
            iters += 1
            if stall >= 5 or dw_last > _DELTA_W_MAX:
                feas = float(np.max(np.abs(c), initial=0.0))
                label = "infeasible" if feas > 1e3 * opt.tol else "numerical-failure"
                return _report(label, x, mults, res0, iters, trace, barrier_trace,
                               msg="line search failed repeatedly")
            continue
        stall = 0

        x = x_try
        fval = f_try
        c = c_try
        lam = lam + alpha * (lam_new - lam)
        zl = np.where(fl, np.maximum(zl + alpha_z * dzl, 0.0), 0.0)
        zu = np.where(fu, np.maximum(zu + alpha_z * dzu, 0.0), 0.0)
        # multiplier safeguard keeps z compatible with the barrier scale
        if np.any(fl):
            lo = mu / (_KAPPA_SIGMA * np.where(fl, x - rl, 1.0))
            hi = _KAPPA_SIGMA * mu / np.where(fl, x - rl, 1.0)
            zl = np.where(fl, np.clip(zl, lo, hi), 0.0)
        if np.any(fu):
            lo = mu / (_KAPPA_SIGMA * np.where(fu, ru - x, 1.0))
            hi = _KAPPA_SIGMA * mu / np.where(fu, ru - x, 1.0)
            zu = np.where(fu, np.clip(zu, lo, hi), 0.0)

        g = problem.gradient(x)
        J = problem.jacobian(x)
        iters += 1

    mults = Multipliers(lam, zl, zu)
    if status != "converged" and iters >= opt.max_iter:
        status = "max-iter"
        message = "iteration limit reached"
    return _report(status, x, mults, res0, iters, trace, barrier_trace, msg=message)
