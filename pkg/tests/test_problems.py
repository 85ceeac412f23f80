import numpy as np
import pytest

from subspace_arc.problems import (
    BUILTIN,
    Problem,
    builtin_problem,
    dense_hessian,
    make_low_rank,
    make_low_rank_spec,
    wrap_low_rank,
)
from subspace_arc.sketch import numeric_rank

from conftest import central_diff_gradient

AUDIT_DIM = 30


def _audit_points(problem, n=10, seed=0, spread=0.3):
    rng = np.random.default_rng(seed)
    return [problem.x0 + spread * rng.standard_normal(problem.dim) for _ in range(n)]


def _wrapped_set():
    out = []
    for name in ("QUADRATIC_SPD", "ROSENBROCK_CHAINED", "ARWHEAD"):
        for r in (5, 10, 20):
            for rotation in ("axis", "haar"):
                base = builtin_problem(name, r)
                out.append(make_low_rank(base, 100, rotation, seed=17 * r + len(name)))
    return out


def test_reference_start_values():
    assert builtin_problem("ARWHEAD", 1000).value(np.ones(1000)) == 2997.0
    assert builtin_problem("ENGVAL1", 1000).value(2.0 * np.ones(1000)) == 58941.0
    assert builtin_problem("POWER", 1000).value(np.ones(1000)) == 250500250000.0
    assert builtin_problem("COSINE", 1000).value(np.ones(1000)) == pytest.approx(
        876.704979, abs=1e-5
    )
    p = builtin_problem("NONDQUAR", 1000)
    assert p.value(p.x0) == 1006.0


def test_standard_starting_points():
    assert np.array_equal(builtin_problem("ARWHEAD", 6).x0, np.ones(6))
    assert np.array_equal(builtin_problem("ENGVAL1", 6).x0, 2.0 * np.ones(6))
    assert np.array_equal(builtin_problem("NONDQUAR", 4).x0, [1.0, -1.0, 1.0, -1.0])
    assert np.array_equal(builtin_problem("ROSENBROCK_CHAINED", 4).x0, [-1.2, 1.0, -1.2, 1.0])


def test_unknown_name_and_bad_dim():
    with pytest.raises(ValueError):
        builtin_problem("NOPE", 10)
    with pytest.raises(ValueError):
        builtin_problem("ARWHEAD", 1)


@pytest.mark.parametrize("name", sorted(BUILTIN))
def test_builtin_gradient_matches_central_differences(name):
    p = builtin_problem(name, AUDIT_DIM)
    for x in _audit_points(p):
        g = p.gradient(x)
        fd = central_diff_gradient(p.value, x)
        assert np.linalg.norm(g - fd) <= 1e-5 * (1.0 + np.linalg.norm(g))


@pytest.mark.parametrize("name", sorted(BUILTIN))
def test_builtin_hvp_symmetric_and_linear(name):
    p = builtin_problem(name, AUDIT_DIM)
    rng = np.random.default_rng(1)
    for x in _audit_points(p, n=5):
        u = rng.standard_normal(p.dim)
        v = rng.standard_normal(p.dim)
        u /= np.linalg.norm(u)
        v /= np.linalg.norm(v)
        assert abs(u @ p.hvp(x, v) - v @ p.hvp(x, u)) <= 1e-10
        lhs = p.hvp(x, 2.0 * u - 3.0 * v)
        rhs = 2.0 * p.hvp(x, u) - 3.0 * p.hvp(x, v)
        assert np.abs(lhs - rhs).max() <= 1e-10 * (1.0 + np.abs(rhs).max())


@pytest.mark.parametrize("name", sorted(BUILTIN))
def test_builtin_hvp_matches_gradient_differences(name):
    p = builtin_problem(name, AUDIT_DIM)
    rng = np.random.default_rng(2)
    x = p.x0 + 0.1 * rng.standard_normal(p.dim)
    v = rng.standard_normal(p.dim)
    v /= np.linalg.norm(v)
    h = 1e-6
    fd = (p.gradient(x + h * v) - p.gradient(x - h * v)) / (2.0 * h)
    hv = p.hvp(x, v)
    assert np.linalg.norm(hv - fd) <= 1e-5 * (1.0 + np.linalg.norm(hv))


def test_axis_aligned_wrapper_forced_values():
    base = Problem(
        "HALFSQ", 2,
        value=lambda y: 0.5 * float(y @ y),
        gradient=lambda y: y,
        hvp=lambda y, v: v,
        x0=np.zeros(2),
        f_star=0.0,
    )
    lifted = make_low_rank(base, 5, "axis")
    x = np.array([1.0, 2.0, 9.0, 9.0, 9.0])
    assert lifted.value(x) == 2.5
    assert np.array_equal(lifted.gradient(x), [1.0, 2.0, 0.0, 0.0, 0.0])


def test_wrapped_hessian_rank_bounded():
    rng = np.random.default_rng(3)
    for name, r in (("QUADRATIC_SPD", 5), ("ROSENBROCK_CHAINED", 8)):
        base = builtin_problem(name, r)
        lifted = make_low_rank(base, 40, "haar", seed=5)
        for _ in range(5):
            x = lifted.x0 + 0.2 * rng.standard_normal(40)
            H = dense_hessian(lifted, x)
            assert numeric_rank(H, 1e-10) <= r


def test_gradient_lies_in_row_space():
    spec = make_low_rank_spec(builtin_problem("ARWHEAD", 6), 30, "haar", seed=9)
    lifted = wrap_low_rank(spec)
    rng = np.random.default_rng(4)
    P = np.eye(30) - spec.A.T @ spec.A
    for _ in range(5):
        x = rng.standard_normal(30)
        g = lifted.gradient(x)
        assert np.linalg.norm(P @ g) <= 1e-10 * (1.0 + np.linalg.norm(g))


def test_value_constant_along_null_space():
    spec = make_low_rank_spec(builtin_problem("QUADRATIC_SPD", 4), 20, "haar", seed=2)
    lifted = wrap_low_rank(spec)
    rng = np.random.default_rng(5)
    P = np.eye(20) - spec.A.T @ spec.A
    for _ in range(10):
        x = rng.standard_normal(20) / 4.0
        n = P @ rng.standard_normal(20)
        assert abs(lifted.value(x + n) - lifted.value(x)) <= 1e-12 * max(1.0, abs(lifted.value(x)))


def test_rotations_agree_at_corresponding_points():
    base = builtin_problem("ROSENBROCK_CHAINED", 5)
    axis = make_low_rank(base, 25, "axis")
    spec = make_low_rank_spec(base, 25, "haar", seed=11)
    rotated = wrap_low_rank(spec)
    rng = np.random.default_rng(6)
    for _ in range(10):
        y = rng.standard_normal(5)
        x_axis = np.concatenate([y, np.zeros(20)])
        x_rot = spec.A.T @ y
        assert axis.value(x_axis) == pytest.approx(rotated.value(x_rot), rel=1e-10, abs=1e-10)


def test_x0_lift_maps_to_base_start():
    base = builtin_problem("ENGVAL1", 7)
    for rotation in ("axis", "haar"):
        spec = make_low_rank_spec(base, 19, rotation, seed=8)
        lifted = wrap_low_rank(spec)
        assert np.abs(spec.A @ lifted.x0 - base.x0).max() < 1e-12
        assert lifted.value(lifted.x0) == pytest.approx(base.value(base.x0), rel=1e-12)


def test_haar_rows_orthonormal():
    spec = make_low_rank_spec(builtin_problem("POWER", 6), 30, "haar", seed=13)
    assert np.abs(spec.A @ spec.A.T - np.eye(6)).max() < 1e-10


def test_ambient_below_rank_rejected():
    with pytest.raises(ValueError):
        make_low_rank(builtin_problem("POWER", 10), 5, "axis")
    with pytest.raises(ValueError):
        make_low_rank(builtin_problem("POWER", 5), 10, "diagonal")


def test_wrapped_set_passes_derivative_audit():
    # The benchmark's full wrapped set: gradient and hvp audits at seeded points.
    for lifted in _wrapped_set():
        rng = np.random.default_rng(7)
        for _ in range(3):
            x = lifted.x0 + 0.1 * rng.standard_normal(lifted.dim)
            g = lifted.gradient(x)
            fd = central_diff_gradient(lifted.value, x)
            assert np.linalg.norm(g - fd) <= 1e-5 * (1.0 + np.linalg.norm(g))
            u = rng.standard_normal(lifted.dim)
            v = rng.standard_normal(lifted.dim)
            u /= np.linalg.norm(u)
            v /= np.linalg.norm(v)
            assert abs(u @ lifted.hvp(x, v) - v @ lifted.hvp(x, u)) <= 1e-10
