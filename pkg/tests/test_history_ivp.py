import math

import numpy as np
import pytest
from scipy.integrate import simpson

from evosg.acceptance import small_delay_system
from evosg.delay_wave import admissible_history, delay_material_law
from evosg.errors import InadmissibleHistoryError
from evosg.fourier_laplace import ConstantLaw, FunctionLaw
from evosg.history_ivp import (
    HistoryState,
    RFunction,
    gamma,
    gamma_jump,
    history_value,
    hy_bound_check,
    k_op,
    post_widder_invert,
    r_function,
    regularising_limit,
    semigroup_orbit,
    semigroup_step,
    solve_ivp,
    tent_history,
)
from evosg.weighted_time import TimeGrid, WeightedSignal

A_SCALAR = 1.5
RHO = 1.0


@pytest.fixture(scope="module")
def scalar_grid():
    return TimeGrid.aligned(-2.0, 40.0, 1 << 14, unit=0.25)


@pytest.fixture(scope="module")
def scalar_solution(scalar_grid):
    g = tent_history(scalar_grid, RHO, [2.0])
    return g, solve_ivp(ConstantLaw(1.0), [[A_SCALAR]], g, RHO)


def test_regularising_limits(rng):
    E = np.array([[2.0, 1.0], [1.0, 3.0]])
    x = rng.standard_normal(2)
    np.testing.assert_allclose(regularising_limit(ConstantLaw(E), x, RHO), E @ x, atol=1e-12)
    # [TRIVIAL] z^{-1} integrates the step, which starts at 0
    inv = FunctionLaw(lambda s: 1.0 / s)
    assert abs(regularising_limit(inv, [1.0], RHO)[0]) < 1e-10


def test_delay_block_regularising_limit(rng):
    mesh, law, M, A = small_delay_system(n_x=3, k=2.0)
    x = rng.standard_normal(mesh.dim)
    grid = TimeGrid.aligned(-1.0, 20.0, 1 << 14, unit=0.25)
    out = regularising_limit(M, x, 2.0, grid=grid)
    np.testing.assert_allclose(out, law.instantaneous() @ x, atol=1e-8)


def test_gamma_and_k_for_constant_law(scalar_grid):
    E = np.array([[1.0, 0.5], [0.5, 2.0]])
    g = tent_history(scalar_grid, RHO, [1.0, -1.0])
    np.testing.assert_allclose(gamma(ConstantLaw(E), g), E @ [1.0, -1.0], atol=1e-10)
    assert k_op(ConstantLaw(E), g).norm() < 1e-12
    zero = g.with_values(0 * g.values)
    assert np.all(gamma(ConstantLaw(E), zero) == 0)
    assert k_op(ConstantLaw(E), zero).norm() == 0


def test_gamma_jump_formula_on_delay_law():
    mesh, law, M, A = small_delay_system(n_x=4)
    grid = TimeGrid.aligned(-1.0, 20.0, 1 << 15, unit=0.25)
    x = np.sin(np.arange(mesh.dim) + 1.0)
    g = admissible_history(law, mesh, x, 2.0, grid=grid)
    np.testing.assert_allclose(gamma(M, g), gamma_jump(M, g), atol=1e-6)


def test_scalar_ivp_is_exponential(scalar_grid, scalar_solution):
    # [DERIVED] v' + a v = 0, v(0) = x: v = x exp(-a t)
    g, sol = scalar_solution
    t = scalar_grid.times
    sel = (t > 0) & (t <= 4)
    np.testing.assert_allclose(sol.v.values[sel, 0].real, 2.0 * np.exp(-A_SCALAR * t[sel]),
                               atol=1e-6)
    assert sol.his_member
    assert sol.diagnostics["pre_zero_norm"] < 1e-6


def test_direct_route_agrees(scalar_grid, scalar_solution):
    g, sol = scalar_solution
    direct = solve_ivp(ConstantLaw(1.0), [[A_SCALAR]], g, RHO, method="direct")
    t = scalar_grid.times
    sel = (t > 0) & (t < 8)
    # the Dirac-atom route carries an extra O(dt^2) from the half-valued node
    np.testing.assert_allclose(direct.u.values[sel], sol.u.values[sel], atol=1e-5)


def test_zero_history_gives_zero(scalar_grid):
    g = WeightedSignal.zeros(scalar_grid, RHO, 1)
    sol = solve_ivp(ConstantLaw(1.0), [[A_SCALAR]], g, RHO)
    assert sol.u.norm() == 0 and sol.v.norm() == 0


def test_history_with_future_samples_rejected(scalar_grid):
    g = tent_history(scalar_grid, RHO, [1.0])
    bad = g.values.copy()
    bad[-5] = 1.0
    with pytest.raises(InadmissibleHistoryError):
        solve_ivp(ConstantLaw(1.0), [[1.0]], g.with_values(bad), RHO)


def test_semigroup_identity_and_composition(scalar_grid, scalar_solution):
    g, _ = scalar_solution
    M, A = ConstantLaw(1.0), [[A_SCALAR]]
    s0 = HistoryState.from_history(g)
    assert s0.distance(semigroup_step(M, A, s0, 0.0)) < 1e-8
    s1 = semigroup_step(M, A, s0, 0.5)
    # [DERIVED] first component follows the scalar ODE
    assert s1.x[0].real == pytest.approx(2.0 * math.exp(-0.75), abs=1e-6)
    s2 = semigroup_step(M, A, s1, 0.25)
    ref = semigroup_orbit(M, A, s0, [0.75])[0]
    assert s2.distance(ref) < 1e-6
    assert s2.distance(ref, mu=0.5) < 1e-6


def test_inconsistent_state_rejected(scalar_solution):
    g, _ = scalar_solution
    with pytest.raises(InadmissibleHistoryError):
        semigroup_step(ConstantLaw(1.0), [[1.0]], HistoryState([5.0], g), 0.1)


def test_r_function_constant_law(scalar_grid, scalar_solution):
    g, sol = scalar_solution
    E = ConstantLaw(1.0)
    for lam in (1.5, 3.0):
        # [PAPER] r_g(lambda) = (lambda E + A)^{-1} E g(0-)
        assert r_function(E, [[A_SCALAR]], g, RHO, lam)[0].real == pytest.approx(
            2.0 / (lam + A_SCALAR), rel=1e-8)
        # [DERIVED] Simpson quadrature of int exp(-lambda t) v(t) dt
        t = scalar_grid.times
        sel = t >= 0
        y = np.exp(-lam * t[sel]) * sol.u.values[sel, 0].real
        quad = simpson(y, dx=scalar_grid.dt)
        assert quad == pytest.approx(2.0 / (lam + A_SCALAR), rel=1e-6)


def test_r_function_zero_history(scalar_grid):
    g = WeightedSignal.zeros(scalar_grid, RHO, 1)
    assert r_function(ConstantLaw(1.0), [[1.0]], g, RHO, 2.0)[0] == 0


def test_r_derivative_closed_form(scalar_solution):
    g, _ = scalar_solution
    rf = RFunction(ConstantLaw(1.0), [[A_SCALAR]], g, RHO)
    lam = 2.0
    for k in range(4):
        exact = (-1) ** k * math.factorial(k) * 2.0 / (lam + A_SCALAR) ** (k + 1)
        assert rf.derivative(lam, k)[0].real == pytest.approx(exact, rel=1e-10)


@pytest.mark.parametrize("mu", [RHO, RHO / 2])
def test_hy_bound_scalar(scalar_solution, mu):
    g, _ = scalar_solution
    rep = hy_bound_check(ConstantLaw(1.0), [[A_SCALAR]], [g], RHO, mu=mu)
    assert rep.details["pass"] and rep.confidence == "high"
    assert rep.M_fit == pytest.approx(1.0, rel=0.05)
    assert rep.omega_fit == pytest.approx(-A_SCALAR, abs=0.05)


def test_hy_bound_zero_history(scalar_grid):
    g = WeightedSignal.zeros(scalar_grid, RHO, 1)
    rep = hy_bound_check(ConstantLaw(1.0), [[1.0]], [g], RHO)
    assert rep.details["trivial"] and rep.M_fit == 1.0


def test_post_widder_scalar_resolvent():
    a, t, k = 1.0, 1.0, 8

    def deriv(lam, k):
        return (-1) ** k * math.factorial(k) / (lam + a) ** (k + 1)

    res = post_widder_invert(lambda lam: 1 / (lam + a), t, k, derivative=deriv)
    # [DERIVED] closed form (1 + a t / k)^{-(k+1)} = (9/8)^{-9}
    assert res.value.real == pytest.approx(0.34643941611461854, rel=1e-12)
    assert abs(res.value.real - math.exp(-1)) < 1.0 / k
    fd = post_widder_invert(lambda lam: 1 / (lam + a), t, k)
    assert fd.value.real == pytest.approx(res.value.real, rel=1e-4)


def test_post_widder_of_one_over_lambda():
    res = post_widder_invert(lambda lam: 1 / lam, 0.7, 5,
                             derivative=lambda lam, k: (-1) ** k * math.factorial(k) / lam ** (k + 1))
    assert res.value.real == pytest.approx(1.0, rel=1e-14)


def test_history_value_is_left_limit(scalar_grid):
    g = tent_history(scalar_grid, RHO, [3.0, -1.0])
    np.testing.assert_allclose(history_value(g), [3.0, -1.0], atol=1e-12)
