"""Benchmark objectives: closed-form test functions and low-rank liftings.

Each problem exposes the objective value, the analytic gradient and a
Hessian-vector product; solvers never see an assembled Hessian (projections
only need products with a handful of directions).  ``dense_hessian`` exists
for tests.

The built-in set reimplements a small selection of classic unconstrained
test functions from their published formulas, at the standard starting
points:

    ARWHEAD               sum_{i<d} [ (x_i^2 + x_d^2)^2 - 4 x_i + 3 ],  x0 = 1
    ENGVAL1               sum_{i<d} [ (x_i^2 + x_{i+1}^2)^2 - 4 x_i + 3 ],  x0 = 2
    POWER                 ( sum_i i * x_i^2 )^2,  x0 = 1
    COSINE                sum_{i<d} cos(x_i^2 - x_{i+1}/2),  x0 = 1
    NONDQUAR              (x_1-x_2)^2 + (x_{d-1}-x_d)^2
                            + sum_{i<=d-2} (x_i + x_{i+1} + x_d)^4,  x0 = (1,-1,...)
    ROSENBROCK_CHAINED    sum_{i<d} [ 100 (x_{i+1} - x_i^2)^2 + (1 - x_i)^2 ],
                            x0 = (-1.2, 1, ...)
    QUADRATIC_SPD         1/2 sum_i i * x_i^2,  x0 = 1

A function of effective rank r <= d has the form f(x) = sigma(A x) with
A in R^{r x d}; it is constant along null(A) and its Hessian
A^T hess_sigma(Ax) A has rank at most r everywhere.  ``make_low_rank`` lifts
any base problem of dimension r to ambient dimension d this way, either
axis-aligned (A = [I | 0], mimicking padding with artificial variables) or
rotated by a random orthonormal A so that no coordinate structure survives.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .rng import generator
from .sketch import orthonormal_rows

ROTATION_AXIS = "axis"
ROTATION_HAAR = "haar"


@dataclass(frozen=True)
class Problem:
    """Objective contract: smooth value, gradient, Hessian-vector product."""

    name: str
    dim: int
    value: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]
    hvp: Callable[[np.ndarray, np.ndarray], np.ndarray]
    x0: np.ndarray
    f_star: float | None = None


def dense_hessian(problem: Problem, x: np.ndarray) -> np.ndarray:
    """Assemble the full Hessian from d products; test utility only."""
    d = problem.dim
    cols = np.column_stack([problem.hvp(x, e) for e in np.eye(d)])
    return 0.5 * (cols + cols.T)


def _arwhead(d: int) -> Problem:
    def value(x):
        h = x[:-1] ** 2 + x[-1] ** 2
        return float(np.sum(h**2) - 4.0 * np.sum(x[:-1]) + 3.0 * (d - 1))

    def gradient(x):
        h = x[:-1] ** 2 + x[-1] ** 2
        g = np.empty(d)
        g[:-1] = 4.0 * h * x[:-1] - 4.0
        g[-1] = 4.0 * x[-1] * np.sum(h)
        return g

    def hvp(x, v):
        h = x[:-1] ** 2 + x[-1] ** 2
        out = np.empty(d)
        out[:-1] = (4.0 * h + 8.0 * x[:-1] ** 2) * v[:-1] + 8.0 * x[:-1] * x[-1] * v[-1]
        out[-1] = 8.0 * x[-1] * np.sum(x[:-1] * v[:-1]) + (
            4.0 * np.sum(h) + 8.0 * (d - 1) * x[-1] ** 2
        ) * v[-1]
        return out

    return Problem("ARWHEAD", d, value, gradient, hvp, np.ones(d), f_star=0.0)


def _engval1(d: int) -> Problem:
    def value(x):
        h = x[:-1] ** 2 + x[1:] ** 2
        return float(np.sum(h**2) - 4.0 * np.sum(x[:-1]) + 3.0 * (d - 1))

    def gradient(x):
        h = x[:-1] ** 2 + x[1:] ** 2
        g = np.zeros(d)
        g[:-1] += 4.0 * h * x[:-1] - 4.0
        g[1:] += 4.0 * h * x[1:]
        return g

    def hvp(x, v):
        a, b = x[:-1], x[1:]
        h = a**2 + b**2
        out = np.zeros(d)
        out[:-1] += (4.0 * h + 8.0 * a**2) * v[:-1] + 8.0 * a * b * v[1:]
        out[1:] += 8.0 * a * b * v[:-1] + (4.0 * h + 8.0 * b**2) * v[1:]
        return out

    return Problem("ENGVAL1", d, value, gradient, hvp, 2.0 * np.ones(d), f_star=0.0)


def _power(d: int) -> Problem:
    w = np.arange(1.0, d + 1.0)

    def value(x):
        return float(np.sum(w * x**2) ** 2)

    def gradient(x):
        return 4.0 * np.sum(w * x**2) * w * x

    def hvp(x, v):
        wx = w * x
        return 4.0 * np.sum(w * x**2) * w * v + 8.0 * wx * np.dot(wx, v)

    return Problem("POWER", d, value, gradient, hvp, np.ones(d), f_star=0.0)


def _cosine(d: int) -> Problem:
    def value(x):
        return float(np.sum(np.cos(x[:-1] ** 2 - 0.5 * x[1:])))

    def gradient(x):
        s = np.sin(x[:-1] ** 2 - 0.5 * x[1:])
        g = np.zeros(d)
        g[:-1] += -2.0 * x[:-1] * s
        g[1:] += 0.5 * s
        return g

    def hvp(x, v):
        u = x[:-1] ** 2 - 0.5 * x[1:]
        s, c = np.sin(u), np.cos(u)
        a = x[:-1]
        out = np.zeros(d)
        out[:-1] += (-4.0 * a**2 * c - 2.0 * s) * v[:-1] + a * c * v[1:]
        out[1:] += a * c * v[:-1] - 0.25 * c * v[1:]
        return out

    # The formula's infimum: every cosine term can reach -1 simultaneously.
    return Problem("COSINE", d, value, gradient, hvp, np.ones(d), f_star=-(d - 1.0))


def _nondquar(d: int) -> Problem:
    def value(x):
        t = x[:-2] + x[1:-1] + x[-1]
        return float((x[0] - x[1]) ** 2 + (x[-2] - x[-1]) ** 2 + np.sum(t**4))

    def gradient(x):
        t = x[:-2] + x[1:-1] + x[-1]
        g = np.zeros(d)
        g[:-2] += 4.0 * t**3
        g[1:-1] += 4.0 * t**3
        g[-1] += 4.0 * np.sum(t**3)
        g[0] += 2.0 * (x[0] - x[1])
        g[1] -= 2.0 * (x[0] - x[1])
        g[-2] += 2.0 * (x[-2] - x[-1])
        g[-1] -= 2.0 * (x[-2] - x[-1])
        return g

    def hvp(x, v):
        t = x[:-2] + x[1:-1] + x[-1]
        w = 12.0 * t**2 * (v[:-2] + v[1:-1] + v[-1])
        out = np.zeros(d)
        out[:-2] += w
        out[1:-1] += w
        out[-1] += np.sum(w)
        out[0] += 2.0 * (v[0] - v[1])
        out[1] -= 2.0 * (v[0] - v[1])
        out[-2] += 2.0 * (v[-2] - v[-1])
        out[-1] -= 2.0 * (v[-2] - v[-1])
        return out

    x0 = np.where(np.arange(d) % 2 == 0, 1.0, -1.0)
    return Problem("NONDQUAR", d, value, gradient, hvp, x0, f_star=0.0)


def _rosenbrock_chained(d: int) -> Problem:
    def value(x):
        r = x[1:] - x[:-1] ** 2
        return float(np.sum(100.0 * r**2 + (1.0 - x[:-1]) ** 2))

    def gradient(x):
        a = x[:-1]
        r = x[1:] - a**2
        g = np.zeros(d)
        g[:-1] += -400.0 * a * r - 2.0 * (1.0 - a)
        g[1:] += 200.0 * r
        return g

    def hvp(x, v):
        a = x[:-1]
        r = x[1:] - a**2
        out = np.zeros(d)
        out[:-1] += (-400.0 * r + 800.0 * a**2 + 2.0) * v[:-1] - 400.0 * a * v[1:]
        out[1:] += -400.0 * a * v[:-1] + 200.0 * v[1:]
        return out

    x0 = np.where(np.arange(d) % 2 == 0, -1.2, 1.0)
    return Problem("ROSENBROCK_CHAINED", d, value, gradient, hvp, x0, f_star=0.0)


def _quadratic_spd(d: int) -> Problem:
    w = np.arange(1.0, d + 1.0)

    def value(x):
        return float(0.5 * np.sum(w * x**2))

    def gradient(x):
        return w * x

    def hvp(x, v):
        return w * v

    return Problem("QUADRATIC_SPD", d, value, gradient, hvp, np.ones(d), f_star=0.0)


BUILTIN: dict[str, Callable[[int], Problem]] = {
    "ARWHEAD": _arwhead,
    "ENGVAL1": _engval1,
    "POWER": _power,
    "COSINE": _cosine,
    "NONDQUAR": _nondquar,
    "ROSENBROCK_CHAINED": _rosenbrock_chained,
    "QUADRATIC_SPD": _quadratic_spd,
}


def builtin_problem(name: str, d: int) -> Problem:
    """Look up a built-in problem by name at dimension d >= 2."""
    if name not in BUILTIN:
        raise ValueError(f"unknown problem {name!r}; available: {sorted(BUILTIN)}")
    if d < 2:
        raise ValueError("built-in problems need d >= 2")
    return BUILTIN[name](d)


@dataclass(frozen=True)
class LowRankSpec:
    """A base objective of dimension r embedded into R^d through A (r x d)."""

    base: Problem
    d: int
    rotation: str
    A: np.ndarray


def make_low_rank_spec(base: Problem, d: int, rotation: str, seed: int = 0) -> LowRankSpec:
    r = base.dim
    if d < r:
        raise ValueError(f"ambient dimension d={d} below base dimension r={r}")
    if rotation == ROTATION_AXIS:
        A = np.eye(r, d)
    elif rotation == ROTATION_HAAR:
        A = orthonormal_rows(generator(seed), r, d)
    else:
        raise ValueError(f"rotation must be {ROTATION_AXIS!r} or {ROTATION_HAAR!r}")
    return LowRankSpec(base=base, d=d, rotation=rotation, A=A)


def wrap_low_rank(spec: LowRankSpec) -> Problem:
    """The lifted problem f(x) = base(A x), with derivatives pulled back
    through A: grad f = A^T grad_base, hvp f = A^T (hess_base (A v))."""
    base, A = spec.base, spec.A

    def value(x):
        return base.value(A @ x)

    def gradient(x):
        return A.T @ base.gradient(A @ x)

    def hvp(x, v):
        return A.T @ base.hvp(A @ x, A @ v)

    if spec.rotation == ROTATION_AXIS:
        x0 = np.concatenate([base.x0, np.zeros(spec.d - base.dim)])
    else:
        x0 = A.T @ base.x0
    name = f"{base.name}_r{base.dim}_{spec.rotation}"
    return Problem(name, spec.d, value, gradient, hvp, x0, f_star=base.f_star)


def make_low_rank(base: Problem, d: int, rotation: str, seed: int = 0) -> Problem:
    return wrap_low_rank(make_low_rank_spec(base, d, rotation, seed))
