"""Exact global minimization of the reduced cubic model.

The reduced dimension l is small by construction, so the model is minimized
through a dense eigendecomposition of B rather than Krylov iterations.  A
global minimizer of

    q(s) + (sigma/3) ||s||^3,   q(s) = f0 + <g,s> + 1/2 <s,Bs>,  sigma = 1/alpha

is characterized by (B + lam I) s = -g with lam = sigma ||s|| and
B + lam I >= 0.  We find lam as the root of the secular function

    phi(lam) = ||(B + lam I)^{-1} g|| - lam / sigma

on [max(0, -lambda_min(B)), inf) by Newton's method safeguarded with a
bisection bracket, following the classical More-Sorensen treatment of the
analogous trust-region equation.  The hard case (g numerically orthogonal to
the minimal eigenspace and no interior root) is resolved by adding a minimal
eigenvector component that brings ||s|| up to lam / sigma.

Subspace-norm models, whose cubic term is ||S^T s||^3, are reduced to the
Euclidean form by a change of variables u = L^T s with L L^T = S S^T + 1e-12 I
(the shift guards rank-deficient sketches), solved, and mapped back.

On return the step is certified against the three standard model-termination
tests: no model increase, small model gradient relative to kappa_T * r^2, and
model curvature bounded below by -kappa_S * r, where r is the model's
regularizer norm at the step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .model import (
    ReducedModel,
    RegMode,
    model_gradient,
    model_hessian,
    model_value,
    regularizer_norm,
)

_MAX_SECULAR_ITER = 200


class NumericError(ArithmeticError):
    """Non-finite data reached the subproblem solver."""


class SolverFailure(RuntimeError):
    """The subproblem solver could not produce a certified step."""


@dataclass(frozen=True)
class SubproblemSolution:
    """A certified minimizer of the reduced cubic model.

    ``conds`` records the three termination tests (no model increase,
    gradient bound, curvature bound) at the configured kappa values.
    """

    s_hat: np.ndarray
    model_decrease: float
    grad_norm: float
    min_curvature: float
    conds: tuple[bool, bool, bool]


def _tie_break_sign(base: np.ndarray, direction: np.ndarray, t: float) -> np.ndarray:
    """Pick base + t*direction or base - t*direction deterministically.

    Both are global minimizers; prefer the candidate whose first nonzero
    component is positive, defaulting to +t.
    """
    plus = base + t * direction
    minus = base - t * direction
    for cand in (plus, minus):
        nz = np.nonzero(cand)[0]
        if nz.size and cand[nz[0]] > 0:
            return cand
    return plus


def _solve_euclidean(g: np.ndarray, H: np.ndarray, sigma: float) -> np.ndarray:
    """Global minimizer of <g,s> + 1/2 <s,Hs> + (sigma/3)||s||^3."""
    w, Q = np.linalg.eigh(H)
    gt = Q.T @ g
    gnorm = float(np.linalg.norm(g))
    lam_bdry = max(0.0, -float(w[0]))
    cluster = w <= w[0] + 1e-12 * max(1.0, float(np.abs(w).max()))

    if gnorm == 0.0:
        if w[0] >= 0.0:
            return np.zeros_like(g)
        # Pure eigenvector step along the most negative curvature.
        t = lam_bdry / sigma
        return _tie_break_sign(np.zeros_like(g), Q[:, 0], t)

    # Decide whether the minimal eigenspace is invisible to g.
    drop = False
    if w[0] < 0.0 or (w[0] <= 0.0 and lam_bdry == 0.0):
        g_min = float(np.linalg.norm(gt[cluster]))
        if g_min <= 1e-12 * gnorm:
            drop = True
            denom_bdry = w[~cluster] + lam_bdry
            norm_bdry = float(np.linalg.norm(gt[~cluster] / denom_bdry)) if denom_bdry.size else 0.0
            if norm_bdry < lam_bdry / sigma:
                # Hard case: boundary multiplier, top up with a null component.
                ut = np.where(cluster, 0.0, -gt / np.where(cluster, 1.0, w + lam_bdry))
                t = np.sqrt(max((lam_bdry / sigma) ** 2 - norm_bdry**2, 0.0))
                return _tie_break_sign(Q @ ut, Q[:, 0], t)

    active = ~cluster if drop else np.ones_like(cluster)
    wa, ga = w[active], gt[active]

    def phi_and_slope(lam: float) -> tuple[float, float]:
        denom = wa + lam
        u = ga / denom
        norm_u = float(np.linalg.norm(u))
        phi = norm_u - lam / sigma
        slope = -float(np.sum(u * u / denom)) / norm_u - 1.0 / sigma if norm_u > 0 else -1.0 / sigma
        return phi, slope

    # Bracket: phi > 0 just right of the boundary, phi <= 0 at
    # lam_bdry + sqrt(sigma * ||g||) since ||u(lam)|| <= ||g|| / (lam - lam_bdry).
    lam_lo = lam_bdry
    lam_hi = lam_bdry + np.sqrt(sigma * gnorm) + 1e-12
    for _ in range(_MAX_SECULAR_ITER):
        if phi_and_slope(lam_hi)[0] <= 0.0:
            break
        lam_hi = lam_bdry + 2.0 * (lam_hi - lam_bdry)
    else:
        raise SolverFailure("could not bracket the secular root from above")

    can_touch_boundary = drop or w[0] > 0.0
    lam = lam_lo if can_touch_boundary else 0.5 * (lam_lo + lam_hi)
    if can_touch_boundary and phi_and_slope(lam_lo)[0] <= 0.0:
        lam = lam_lo  # root exactly on the boundary
    else:
        for _ in range(_MAX_SECULAR_ITER):
            phi, slope = phi_and_slope(lam)
            if phi > 0.0:
                lam_lo = lam
            else:
                lam_hi = lam
            if abs(phi) <= 1e-13 * max(1.0, lam / sigma):
                break
            step = lam - phi / slope
            if not lam_lo < step < lam_hi:
                step = 0.5 * (lam_lo + lam_hi)
            if step == lam:
                break
            lam = step
        else:
            raise SolverFailure(
                f"secular Newton did not converge in {_MAX_SECULAR_ITER} iterations"
            )

    ut = np.zeros_like(gt)
    ut[active] = -ga / (wa + lam)
    return Q @ ut


def solve_cubic(
    m: ReducedModel,
    kappa_T: float = 1.0,
    kappa_S: float = 1.0,
    check_second_order: bool = True,
) -> SubproblemSolution:
    """Globally minimize the reduced cubic model and certify the step.

    Raises NumericError on non-finite model data and SolverFailure if the
    secular iteration stalls or the certificates cannot be met; it never
    silently returns an uncertified step.
    """
    g, B = m.g_hat, m.B_hat
    if not (np.isfinite(g).all() and np.isfinite(B).all() and np.isfinite(m.alpha)):
        raise NumericError("model contains non-finite entries")
    sigma = 1.0 / m.alpha

    if m.reg_mode is RegMode.SUBSPACE_NORM:
        # Change of variables u = L^T s turns ||S^T s|| into ||u||.
        P = m.S.entries @ m.S.entries.T + 1e-12 * np.eye(m.l)
        L = np.linalg.cholesky(P)
        g_u = solve_triangular(L, g, lower=True)
        Binv = solve_triangular(L, B, lower=True)
        H_u = solve_triangular(L, Binv.T, lower=True)
        H_u = 0.5 * (H_u + H_u.T)
        u = _solve_euclidean(g_u, H_u, sigma)
        s_hat = solve_triangular(L.T, u, lower=False)
    else:
        s_hat = _solve_euclidean(g, B, sigma)

    decrease = m.f0 - model_value(m, s_hat)
    grad_norm = float(np.linalg.norm(model_gradient(m, s_hat)))
    if np.any(s_hat) and regularizer_norm(m, s_hat) > 0.0:
        min_curv = float(np.linalg.eigvalsh(model_hessian(m, s_hat))[0])
    else:
        min_curv = float(np.linalg.eigvalsh(B)[0])

    r = regularizer_norm(m, s_hat)
    gscale = 1e-8 * (1.0 + float(np.linalg.norm(g)))
    bscale = 1e-8 * (1.0 + float(np.linalg.norm(B, np.inf)))
    conds = (
        decrease >= -1e-12,
        grad_norm <= kappa_T * r**2 + gscale,
        min_curv >= -kappa_S * r - bscale,
    )
    checked = conds if check_second_order else conds[:2]
    if not all(checked):
        raise SolverFailure(f"step failed certification {conds}")
    return SubproblemSolution(
        s_hat=s_hat,
        model_decrease=float(decrease),
        grad_norm=grad_norm,
        min_curvature=min_curv,
        conds=conds,
    )
