"""Shared independent oracles for the test suite.

These stay deliberately naive (loops, central differences, dense grids) so
they cannot share a failure mode with the library code they check.
"""

from __future__ import annotations

import numpy as np
import pytest


def central_diff_gradient(fun, x, h=1e-6):
    """Componentwise central differences of a scalar function."""
    x = np.asarray(x, dtype=float)
    g = np.zeros_like(x)
    for i in range(x.size):
        step = h * max(1.0, abs(x[i]))
        e = np.zeros_like(x)
        e[i] = step
        g[i] = (fun(x + e) - fun(x - e)) / (2.0 * step)
    return g


def central_diff_jacobian(fun, x, h=1e-6):
    """Central-difference Jacobian of a vector function."""
    x = np.asarray(x, dtype=float)
    cols = []
    for i in range(x.size):
        step = h * max(1.0, abs(x[i]))
        e = np.zeros_like(x)
        e[i] = step
        cols.append((np.asarray(fun(x + e)) - np.asarray(fun(x - e))) / (2.0 * step))
    return np.column_stack(cols)


def matvec_tripleloop(M, v):
    """Matrix-vector product written as the definition, no BLAS."""
    out = np.zeros(M.shape[0])
    for i in range(M.shape[0]):
        acc = 0.0
        for j in range(M.shape[1]):
            acc += M[i, j] * v[j]
        out[i] = acc
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
