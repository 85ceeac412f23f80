"""The reduced cubic model built from sketched derivatives.

At an iterate x with objective value f0, sketch S, projected gradient
g = S grad f(x) and projected Hessian B = S hess f(x) S^T, the model over the
reduced variable s in R^l is

    m(s) = f0 + <g, s> + 1/2 <s, B s> + 1/(3 alpha) * r(s)^3,

where the regularizer norm r(s) is either ||S^T s|| (the form the convergence
theory is stated for) or plain ||s|| (a practical variant that behaves better
inside the subproblem solver and is the benchmark default).  The two coincide
whenever S has orthonormal rows scaled to S S^T = I, in particular for the
identity sketch.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .sketch import SketchMatrix


class RegMode(str, enum.Enum):
    """Which norm the cubic term penalizes."""

    SUBSPACE_NORM = "subspace"  # ||S^T s||^3
    REDUCED_NORM = "reduced"    # ||s||^3


@dataclass(frozen=True)
class ReducedModel:
    """Sketched second-order data plus the regularization weight 1/alpha."""

    f0: float
    g_hat: np.ndarray
    B_hat: np.ndarray
    alpha: float
    reg_mode: RegMode = RegMode.REDUCED_NORM
    S: SketchMatrix | None = None

    def __post_init__(self) -> None:
        l = self.g_hat.shape[0]
        if self.B_hat.shape != (l, l):
            raise ValueError(f"B_hat must be {l}x{l}, got {self.B_hat.shape}")
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        with np.errstate(invalid="ignore"):  # non-finite data is the solver's error to raise
            scale = max(1.0, float(np.abs(self.B_hat).max(initial=0.0)))
            if float(np.abs(self.B_hat - self.B_hat.T).max(initial=0.0)) > 1e-12 * scale:
                raise ValueError("B_hat must be symmetric")
        if self.reg_mode is RegMode.SUBSPACE_NORM and self.S is None:
            raise ValueError("subspace-norm regularization needs the sketch matrix")

    @property
    def l(self) -> int:
        return self.g_hat.shape[0]


def regularizer_norm(m: ReducedModel, s_hat: np.ndarray) -> float:
    """r(s): ||S^T s|| or ||s|| depending on the model's mode."""
    if m.reg_mode is RegMode.SUBSPACE_NORM:
        return float(np.linalg.norm(m.S.entries.T @ s_hat))
    return float(np.linalg.norm(s_hat))


def quadratic_part(m: ReducedModel, s_hat: np.ndarray) -> float:
    """f0 + <g, s> + 1/2 <s, B s>, the second-order Taylor piece."""
    return m.f0 + float(m.g_hat @ s_hat) + 0.5 * float(s_hat @ (m.B_hat @ s_hat))


def model_value(m: ReducedModel, s_hat: np.ndarray) -> float:
    """Full model value; equals f0 exactly at s = 0."""
    r = regularizer_norm(m, s_hat)
    return quadratic_part(m, s_hat) + r**3 / (3.0 * m.alpha)


def model_gradient(m: ReducedModel, s_hat: np.ndarray) -> np.ndarray:
    """grad m(s) = g + B s + (1/alpha) * cubic-term gradient.

    Subspace mode: (1/alpha) (S S^T s) ||S^T s||; reduced mode:
    (1/alpha) s ||s||.  Smooth everywhere including s = 0.
    """
    core = m.g_hat + m.B_hat @ s_hat
    if m.reg_mode is RegMode.SUBSPACE_NORM:
        sts = m.S.entries.T @ s_hat
        return core + (m.S.entries @ sts) * (np.linalg.norm(sts) / m.alpha)
    return core + s_hat * (np.linalg.norm(s_hat) / m.alpha)


def model_hessian(m: ReducedModel, s_hat: np.ndarray) -> np.ndarray:
    """hess m(s) for s != 0.

    Subspace mode:
        B + (1/alpha) [ (S S^T s)(S S^T s)^T / ||S^T s|| + ||S^T s|| S S^T ];
    reduced mode replaces S S^T by the identity and ||S^T s|| by ||s||.
    The cubic term is not twice differentiable at s = 0; callers that need a
    curvature certificate there should use B itself (the cubic contribution
    vanishes in the limit along every fixed direction).
    """
    if m.reg_mode is RegMode.SUBSPACE_NORM:
        sts = m.S.entries.T @ s_hat
        r = float(np.linalg.norm(sts))
        if r == 0.0:
            raise ValueError("model hessian undefined where ||S^T s|| = 0")
        p = m.S.entries @ sts
        return m.B_hat + (np.outer(p, p) / r + r * (m.S.entries @ m.S.entries.T)) / m.alpha
    r = float(np.linalg.norm(s_hat))
    if r == 0.0:
        raise ValueError("model hessian undefined at s = 0")
    return m.B_hat + (np.outer(s_hat, s_hat) / r + r * np.eye(m.l)) / m.alpha
