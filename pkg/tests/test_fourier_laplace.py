import math

import numpy as np
import pytest
from scipy.special import erf

from evosg.errors import AbscissaError, NotInDomainError
from evosg.fourier_laplace import (
    ConstantLaw,
    FunctionLaw,
    ShiftLaw,
    Spectrum,
    adjoint_derivative,
    antiderivative,
    apply_material_law,
    check_material_law,
    derivative,
    derivative_symbol,
    inverse_laplace,
    laplace,
)
from evosg.weighted_time import TimeGrid, WeightedSignal, indicator, translate, weighted_inner

from conftest import bump, gaussian, random_signal


@pytest.mark.parametrize("rho", [0.5, 1.0, 2.0])
def test_laplace_is_unitary(rng, grid, rho):
    for _ in range(10):
        f = random_signal(rng, grid, rho, 3)
        assert laplace(f).norm() == pytest.approx(f.norm(), rel=1e-12)


def test_laplace_of_zero():
    g = TimeGrid(-1.0, 0.1, 64)
    F = laplace(WeightedSignal.zeros(g, 1.0, 2))
    assert np.all(F.values == 0)


def test_gaussian_transform_matches_closed_form():
    # [DERIVED] (2 pi)^{-1/2} int exp(-i xi s) exp(-s^2/2) ds = exp(-xi^2/2)
    g = TimeGrid.covering(-20.0, 20.0, 1024)
    f = WeightedSignal(g, 0.0, np.exp(-0.5 * g.times**2))
    F = laplace(f)
    np.testing.assert_allclose(F.values[:, 0], np.exp(-0.5 * F.xi**2), atol=1e-8)
    # frozen spot value at xi = pi / 10 (bin 2): exp(-pi^2/200)
    assert F.values[2, 0].real == pytest.approx(0.9518498073692735, abs=1e-12)


def _rel(a, b):
    """Relative distance in the weighted norm of ``b``."""
    return (a - b).norm() / b.norm()


def test_round_trips(rng, grid):
    f = random_signal(rng, grid, 1.0, 2)
    assert _rel(inverse_laplace(laplace(f)), f) < 1e-13
    F = Spectrum(grid, 1.0, rng.standard_normal((grid.n_points, 2)) + 0j)
    back = laplace(inverse_laplace(F))
    assert np.linalg.norm(back.values - F.values) < 1e-12 * np.linalg.norm(F.values)


def test_derivative_of_modulated_gaussian():
    # [DERIVED] d/dt sin(3t) exp(-t^2) = (3 cos 3t - 2t sin 3t) exp(-t^2)
    g = TimeGrid.covering(-10.0, 20.0, 4096)
    t = g.times
    f = WeightedSignal(g, 1.0, np.sin(3 * t) * np.exp(-t * t))
    exact = (3 * np.cos(3 * t) - 2 * t * np.sin(3 * t)) * np.exp(-t * t)
    assert _rel(derivative(f), f.with_values(exact)) < 1e-10
    sel = t < 8.0
    np.testing.assert_allclose(derivative(f).values[sel, 0].real, exact[sel], atol=1e-9)


def test_derivative_rejects_jumps():
    g = TimeGrid(-4.0, 1 / 64, 1024)
    with pytest.raises(NotInDomainError):
        derivative(WeightedSignal(g, 1.0, indicator(g, 0.0, 1.0)))


def test_antiderivative_of_indicator():
    # [TRIVIAL] int chi_[0,1) = min(max(t, 0), 1)
    g = TimeGrid(-2.0, 1 / 128, 1024)
    f = WeightedSignal(g, 1.0, indicator(g, 0.0, 1.0, convention="mean"))
    got = antiderivative(f).values[:, 0].real
    exact = np.clip(g.times, 0.0, 1.0)
    # the trapezoid rule is exact except at the two jump nodes (off by dt/4)
    near = (np.abs(g.times) < 1e-12) | (np.abs(g.times - 1) < 1e-12)
    np.testing.assert_allclose(got[~near], exact[~near], atol=1e-13)
    np.testing.assert_allclose(got[near], exact[near], atol=g.dt / 4 + 1e-13)


def test_antiderivative_of_gaussian_matches_erf():
    # [DERIVED] int_{-inf}^t exp(-s^2) ds = sqrt(pi)/2 (1 + erf t)
    g = TimeGrid.covering(-12.0, 20.0, 1 << 13)
    f = gaussian(g, 1.0)
    exact = 0.5 * math.sqrt(math.pi) * (1 + erf(g.times))
    np.testing.assert_allclose(antiderivative(f).values[:, 0].real, exact, atol=1e-5)
    spectral = apply_material_law(FunctionLaw(lambda z: 1 / z), f, calculus="exact")
    sel = g.times < 10.0
    np.testing.assert_allclose(spectral.values[sel, 0].real, exact[sel], atol=1e-8)


def test_antiderivative_norm_bound(rng, grid):
    for rho in (0.5, 2.0):
        f = random_signal(rng, grid, rho, 2)
        assert antiderivative(f).norm() <= f.norm() / rho * (1 + 1e-10)


def test_adjoint_derivative_of_real_bump():
    # [DERIVED] with rho = 1 the adjoint of d/dt is -d/dt + 2 rho
    g = TimeGrid.covering(-12.0, 40.0, 1 << 13)
    t = g.times
    x = t / 1.5
    f = WeightedSignal(g, 1.0, np.exp(-x * x))
    exact = (2 * t / 1.5**2) * np.exp(-x * x) + 2 * np.exp(-x * x)
    assert _rel(adjoint_derivative(f), f.with_values(exact)) < 1e-10


def test_adjoint_pairing(rng, grid):
    f = random_signal(rng, grid, 0.8, 2)
    h = random_signal(rng, grid, 0.8, 2)
    lhs = weighted_inner(derivative(f), h)
    rhs = weighted_inner(f, adjoint_derivative(h))
    assert lhs == pytest.approx(rhs, rel=1e-8)
    assert derivative(f).norm() == pytest.approx(adjoint_derivative(f).norm(), rel=1e-8)


def test_identity_law_leaves_signal(rng, grid):
    f = random_signal(rng, grid, 1.0, 2)
    out = apply_material_law(ConstantLaw(np.eye(2)), f, calculus="exact")
    assert _rel(out, f) < 1e-13


@pytest.mark.parametrize("calculus", ["exact", "trapezoid"])
def test_shift_law_is_a_delay(rng, grid, calculus):
    f = random_signal(rng, grid, 1.0, 1)
    h = 64 * grid.dt
    out = apply_material_law(ShiftLaw(h), f, calculus=calculus)
    assert _rel(out, translate(f, -h)) < 1e-8


def test_trapezoid_symbol_inverts_cumulative_rule(rng, grid):
    s = derivative_symbol(grid, 1.0, "trapezoid")
    z = derivative_symbol(grid, 1.0, "exact")
    small = np.abs(z) < 1.0
    np.testing.assert_allclose(s[small], z[small], rtol=grid.dt**2)


def test_law_below_abscissa_rejected():
    law = FunctionLaw(lambda z: 1 / (z - 1.0), rho0=1.0)
    with pytest.raises(AbscissaError):
        law(0.5 + 0j)


def test_check_material_law_reports():
    rep = check_material_law(ShiftLaw(0.5), 0.5)
    assert rep["analytic"] and rep["bounded"] and rep["heuristic"]
    assert rep["sup_norm"] <= math.exp(-0.25) + 1e-12
