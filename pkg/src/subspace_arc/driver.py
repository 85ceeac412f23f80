"""Outer loops: cubic regularization in the full space and in random subspaces.

One iteration sketches the current gradient and Hessian with an l x d random
matrix S, globally minimizes the reduced cubic model over R^l, prolongs the
reduced step as s = S^T s_hat and accepts it when the objective decrease is at
least theta times the decrease predicted by the quadratic part of the model.
On acceptance the step parameter alpha grows by gamma2 = gamma1^(-c), capped
at alpha_max; otherwise it shrinks by gamma1 and the sketch is *reused*, so
failed iterations pay no fresh derivative projections.

Three modes fall out of the configuration:

* ARC      -- identity sketch with l = d (the classical full-space method);
* R-ARC    -- a fixed sketch dimension l;
* R-ARC-D  -- adaptive l, grown from the running maximum Rhat of the observed
              numerical rank of the projected Hessian via
              l_next = max(ceil(C * Rhat + D), l) whenever Rhat increases
              (always at iteration 0), clipped at d.  With C = D = 1 this
              settles at one more than the objective's effective rank.

Termination uses the *sketched* gradient norm ||S grad f|| < gtol, which
keeps the full gradient out of the algorithm's required inputs; when a
second-order tolerance eps_H is configured, the run additionally continues
until the projected Hessian's smallest eigenvalue is >= -eps_H.

Per-iteration cost is tracked as "relative Hessians seen", (l/d)^2 per
iteration, the budget unit the benchmark profiles are drawn against.
"""

from __future__ import annotations

import enum
import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .model import ReducedModel, RegMode, quadratic_part
from .problems import Problem
from .rng import derive_seed
from .sketch import (
    GAUSSIAN,
    Ensemble,
    SketchMatrix,
    draw_sketch,
    numeric_rank,
    sketch_hessian,
    sketch_vector,
)
from .subproblem import SolverFailure, solve_cubic


class Status(str, enum.Enum):
    GRAD_TOLERANCE_MET = "GradToleranceMet"
    SECOND_ORDER_MET = "SecondOrderMet"
    MAX_ITER = "MaxIter"
    SOLVER_FAILURE = "SolverFailure"


@dataclass(frozen=True)
class SolverConfig:
    """All algorithm constants; a run is a pure function of (problem, config).

    ``l`` fixes the sketch dimension (None means full space); ``l0`` is the
    starting dimension when ``adaptive``.  ``eps_H`` switches on second-order
    stopping.  Defaults gamma1=0.5, c=2 (so gamma2=4), theta=0.01,
    alpha_max=1e6, p=1 satisfy the standard constraints; gtol and max_iter
    are the benchmark-protocol values.
    """

    ensemble: Ensemble = GAUSSIAN
    l: int | None = None
    l0: int | None = None
    adaptive: bool = False
    C: float = 1.0
    D: float = 1.0
    reg_mode: RegMode = RegMode.REDUCED_NORM
    gamma1: float = 0.5
    c: int = 2
    theta: float = 0.01
    alpha_max: float = 1e6
    p: int = 1
    kappa_T: float = 1.0
    kappa_S: float = 1.0
    rank_tol: float = 1e-10
    gtol: float = 1e-5
    eps_H: float | None = None
    max_iter: int = 2000
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 < self.gamma1 < 1.0:
            raise ValueError("gamma1 must lie in (0, 1)")
        if self.c < 1 or int(self.c) != self.c:
            raise ValueError("c must be a positive integer")
        if not 0.0 < self.theta < 1.0:
            raise ValueError("theta must lie in (0, 1)")
        if not self.alpha_max > 0:
            raise ValueError("alpha_max must be positive")
        if self.p < 1 or int(self.p) != self.p:
            raise ValueError("p must be a positive integer")
        if self.kappa_T < 0 or self.kappa_S < 0:
            raise ValueError("kappa_T and kappa_S must be nonnegative")
        if self.adaptive:
            if self.l0 is None or self.l0 < 1:
                raise ValueError("adaptive mode needs an initial dimension l0 >= 1")
            if self.C < 1 or self.D < 1:
                raise ValueError("adaptive mode needs C >= 1 and D >= 1")
        elif self.l is not None and self.l < 1:
            raise ValueError("l must be >= 1")
        if not self.gtol > 0:
            raise ValueError("gtol must be positive")
        if self.eps_H is not None and not self.eps_H > 0:
            raise ValueError("eps_H must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.rank_tol <= 0:
            raise ValueError("rank_tol must be positive")

    @property
    def gamma2(self) -> float:
        return self.gamma1 ** (-self.c)

    @property
    def alpha0(self) -> float:
        return self.alpha_max * self.gamma1**self.p


@dataclass
class IterateState:
    """Mutable loop state; ``l`` is the row count of the sketch in use while
    ``l_next`` is the scheduled dimension for the next fresh draw."""

    x: np.ndarray
    k: int
    alpha: float
    l: int
    S: SketchMatrix
    Rhat: int = 0
    Rhat_prev: int = 0
    last_success: bool = True
    cum_rel_hessians: float = 0.0
    fx: float = 0.0
    l_next: int = 0
    draws: int = 0


@dataclass(frozen=True)
class IterationRow:
    """One trace row; ``f`` is the objective at the iterate the iteration
    started from.  ``q_decrease`` and ``rho`` are kept for auditing but are
    not part of the CSV schema."""

    k: int
    f: float
    sketched_grad_norm: float
    true_grad_norm: float
    l: int
    alpha: float
    success: bool
    step_norm: float
    cum_rel_hess: float
    wall_ns: int
    q_decrease: float = 0.0
    rho: float | None = None


@dataclass(frozen=True)
class RunRecord:
    problem: str
    dim: int
    status: Status
    rows: tuple[IterationRow, ...]

    @property
    def final_f(self) -> float:
        return self.rows[-1].f

    @property
    def iterations(self) -> int:
        return self.rows[-1].k


def rho(f_k: float, f_trial: float, qhat0: float, qhat_s: float) -> float | None:
    """Decrease ratio (f_k - f_trial) / (qhat0 - qhat_s); None when the
    predicted decrease is below 1e-14 (it can vanish under sketching even
    away from stationarity)."""
    denom = qhat0 - qhat_s
    if denom > 1e-14:
        return (f_k - f_trial) / denom
    return None


def update_sketch_dim(
    Rhat_k: int, Rhat_prev: int, l_k: int, k: int, C: float, D: float, d: int
) -> int:
    """Adaptive dimension rule: grow to ceil(C*Rhat + D) when the observed
    rank record increases (and unconditionally at k=0), never shrink, never
    exceed d."""
    if k == 0 or Rhat_k > Rhat_prev:
        l_next = max(math.ceil(C * Rhat_k + D), l_k)
    else:
        l_next = l_k
    return min(d, l_next)


def _initial_state(problem: Problem, cfg: SolverConfig) -> IterateState:
    d = problem.dim
    if cfg.adaptive:
        l = min(cfg.l0, d)
    else:
        l = d if cfg.l is None else cfg.l
    if l > d:
        raise ValueError(f"sketch dimension l={l} exceeds problem dimension d={d}")
    x0 = np.asarray(problem.x0, dtype=float).copy()
    S = draw_sketch(cfg.ensemble, l, d, derive_seed(cfg.seed, 0))
    return IterateState(
        x=x0,
        k=0,
        alpha=cfg.alpha0,
        l=l,
        S=S,
        fx=float(problem.value(x0)),
        l_next=l,
    )


def rarc_iteration(
    state: IterateState, problem: Problem, cfg: SolverConfig
) -> tuple[IterateState, IterationRow]:
    """One model-build / solve / accept-reject cycle.

    Consumes the sketch stored in ``state`` and leaves the sketch for the
    next iteration in place: a fresh draw (at the scheduled dimension) after
    a success, the same object after a failure.
    """
    t0 = time.perf_counter_ns()
    x, S, alpha = state.x, state.S, state.alpha
    d = problem.dim
    f0 = state.fx

    grad = problem.gradient(x)
    g_hat = sketch_vector(S, grad)
    B_hat = sketch_hessian(S, lambda v: problem.hvp(x, v))
    m = ReducedModel(f0=f0, g_hat=g_hat, B_hat=B_hat, alpha=alpha, reg_mode=cfg.reg_mode, S=S)
    try:
        sol = solve_cubic(m, cfg.kappa_T, cfg.kappa_S, check_second_order=cfg.eps_H is not None)
    except SolverFailure as exc:
        raise SolverFailure(f"iteration {state.k} on {problem.name}: {exc}") from exc

    s = S.entries.T @ sol.s_hat
    f_trial = float(problem.value(x + s))
    qhat_s = quadratic_part(m, sol.s_hat)
    ratio = rho(f0, f_trial, f0, qhat_s)
    if ratio is None:
        # Predicted decrease vanished; accept only a genuine objective drop.
        success = (f0 - f_trial) >= 1e-14
    else:
        success = ratio >= cfg.theta

    if success:
        state.x = x + s
        state.fx = f_trial
        state.alpha = min(cfg.alpha_max, cfg.gamma2 * alpha)
    else:
        state.alpha = cfg.gamma1 * alpha
    state.last_success = success
    state.cum_rel_hessians += (state.l / d) ** 2

    if cfg.adaptive:
        r_hat = numeric_rank(B_hat, cfg.rank_tol)
        state.Rhat_prev = state.Rhat
        state.Rhat = max(state.Rhat, r_hat)
        state.l_next = update_sketch_dim(
            state.Rhat, state.Rhat_prev, state.l_next, state.k, cfg.C, cfg.D, d
        )

    if success:
        state.draws += 1
        state.S = draw_sketch(cfg.ensemble, state.l_next, d, derive_seed(cfg.seed, state.draws))

    row = IterationRow(
        k=state.k,
        f=f0,
        sketched_grad_norm=float(np.linalg.norm(g_hat)),
        true_grad_norm=float(np.linalg.norm(grad)),
        l=S.l,
        alpha=alpha,
        success=success,
        step_norm=float(np.linalg.norm(s)),
        cum_rel_hess=state.cum_rel_hessians,
        wall_ns=time.perf_counter_ns() - t0,
        q_decrease=f0 - qhat_s,
        rho=ratio,
    )
    state.l = state.S.l
    state.k += 1
    return state, row


def run(problem: Problem, cfg: SolverConfig) -> RunRecord:
    """Iterate until the sketched gradient (and, in second-order mode, the
    projected curvature) meets tolerance, or max_iter is reached.

    The trace has one row per iteration plus a terminal row for the final
    iterate.  A SolverFailure from the subproblem propagates with the partial
    record attached as ``exc.record``.
    """
    state = _initial_state(problem, cfg)
    rows: list[IterationRow] = []
    status: Status | None = None

    while True:
        grad = problem.gradient(state.x)
        g_hat = sketch_vector(state.S, grad)
        gnorm_hat = float(np.linalg.norm(g_hat))
        if gnorm_hat < cfg.gtol:
            if cfg.eps_H is None:
                status = Status.GRAD_TOLERANCE_MET
            else:
                B_hat = sketch_hessian(state.S, lambda v: problem.hvp(state.x, v))
                if float(np.linalg.eigvalsh(B_hat)[0]) >= -cfg.eps_H:
                    status = Status.SECOND_ORDER_MET
        if status is None and state.k >= cfg.max_iter:
            status = Status.MAX_ITER
        if status is not None:
            rows.append(
                IterationRow(
                    k=state.k,
                    f=state.fx,
                    sketched_grad_norm=gnorm_hat,
                    true_grad_norm=float(np.linalg.norm(grad)),
                    l=state.l,
                    alpha=state.alpha,
                    success=False,
                    step_norm=0.0,
                    cum_rel_hess=state.cum_rel_hessians,
                    wall_ns=0,
                )
            )
            break
        try:
            state, row = rarc_iteration(state, problem, cfg)
        except SolverFailure as exc:
            exc.record = RunRecord(  # type: ignore[attr-defined]
                problem=problem.name, dim=problem.dim, status=Status.SOLVER_FAILURE,
                rows=tuple(rows),
            )
            raise
        rows.append(row)

    return RunRecord(problem=problem.name, dim=problem.dim, status=status, rows=tuple(rows))
