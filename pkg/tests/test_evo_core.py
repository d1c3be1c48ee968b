import math

import numpy as np
import pytest

from evosg.cutoff_ops import MinusOneElement, embed
from evosg.delay_wave import DelayLaw, SpatialMesh, build_block_operator, delay_material_law
from evosg.errors import IllPosedError
from evosg.evo_core import (
    SpatialOperator,
    check_causality,
    check_rho_independence,
    scan_wellposedness,
    solve,
)
from evosg.fourier_laplace import ConstantLaw, ShiftLaw, antiderivative
from evosg.weighted_time import TimeGrid, WeightedSignal, indicator

from conftest import random_signal


def _skew(rng, m):
    B = rng.standard_normal((m, m))
    return B - B.T


def test_adjoint_residual(rng):
    A = SpatialOperator(rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4)))
    assert A.adjoint_residual() < 1e-12
    S = SpatialOperator(_skew(rng, 5))
    assert S.skew_residual() < 1e-15


def test_scan_positive_scalar():
    # [DERIVED] |z + a|^{-1} <= 1/(rho1 + a) <= 1/rho1 on Re z >= rho1
    rep = scan_wellposedness(ConstantLaw(1.0), [[2.0]], [0.5, 1.0])
    assert rep.passed and rep.rho1_estimate == 0.5
    assert rep.sup_resolvent_norm <= 1 / 0.5


def test_scan_skew(rng):
    rep = scan_wellposedness(ConstantLaw(np.eye(4)), _skew(rng, 4), [0.25])
    assert rep.passed and rep.sup_resolvent_norm <= 1 / 0.25 * (1 + 1e-12)


def test_scan_delay_block():
    mesh = SpatialMesh(0.0, 1.0, 4)
    law = DelayLaw.on_mesh(mesh, [0.25], [0.1])
    rep = scan_wellposedness(delay_material_law(law), build_block_operator(mesh), [2.0, 5.0])
    assert rep.passed


def test_scan_reports_failure():
    rep = scan_wellposedness(ConstantLaw(0.0), [[0.0]], [1.0])
    assert not rep.passed and rep.rho1_estimate is None


def test_scalar_solve_matches_variation_of_constants():
    # [DERIVED] u' + a u = chi_[0,1): u = (1 - e^{-at})/a, then decays like e^{-a(t-1)}
    a = 2.0
    g = TimeGrid(-4.0, 1 / 1024, 1 << 15)
    f = WeightedSignal(g, 1.0, indicator(g, 0.0, 1.0, "mean"))
    u = solve(ConstantLaw(1.0), [[a]], embed(f), 1.0).values[:, 0].real
    t = g.times
    exact = np.where(t < 0, 0.0, (1 - np.exp(-a * np.clip(t, 0, 1))) / a)
    exact = np.where(t > 1, exact * np.exp(-a * (t - 1)), exact)
    jumps = np.isclose(t, 0.0) | np.isclose(t, 1.0)
    sel = (t < 6) & ~jumps
    np.testing.assert_allclose(u[sel], exact[sel], atol=1e-6)
    # the half-valued source nodes are first order accurate
    np.testing.assert_allclose(u[jumps], exact[jumps], atol=g.dt)
    # frozen value at t = 1/2: (1 - e^{-1}) / 2
    assert u[g.index(0.5)] == pytest.approx(0.31606027941427883, abs=1e-6)


def test_zero_and_pure_antiderivative(rng):
    g = TimeGrid(-4.0, 1 / 128, 1 << 12)
    Z = MinusOneElement.zeros(g, 1.0, 2)
    assert solve(ConstantLaw(np.eye(2)), np.zeros((2, 2)), Z, 1.0).norm() == 0.0
    f = random_signal(rng, g, 1.0, 2)
    u = solve(ConstantLaw(np.eye(2)), np.zeros((2, 2)), f, 1.0)
    assert (u - antiderivative(f)).norm() < 1e-10 * u.norm()


def test_linearity_and_residual(rng):
    g = TimeGrid(-4.0, 1 / 128, 1 << 12)
    E, A = np.diag([1.0, 2.0, 3.0]), _skew(rng, 3) + np.eye(3)
    f, h = random_signal(rng, g, 1.0, 3), random_signal(rng, g, 1.0, 3)
    M = ConstantLaw(E)
    u, info = solve(M, A, 2 * f + 3j * h, 1.0, return_info=True)
    v = 2 * solve(M, A, f, 1.0) + 3j * solve(M, A, h, 1.0)
    assert (u - v).norm() < 1e-10 * u.norm()
    assert info.max_residual < 1e-10 and info.h1_resolved


def test_norm_bound(rng):
    g = TimeGrid(-4.0, 1 / 128, 1 << 12)
    A = _skew(rng, 3)
    rep = scan_wellposedness(ConstantLaw(np.eye(3)), A, [1.0])
    f = random_signal(rng, g, 1.0, 3)
    u = solve(ConstantLaw(np.eye(3)), A, f, 1.0)
    assert u.norm() <= rep.sup_resolvent_norm * f.norm() * (1 + 1e-6)


def test_singular_problem_raises():
    g = TimeGrid(-4.0, 1 / 64, 512)
    f = WeightedSignal(g, 1.0, indicator(g, 0.0, 1.0))
    with pytest.raises(IllPosedError):
        solve(ConstantLaw(np.zeros((2, 2))), np.zeros((2, 2)), f.with_values(f.values @ [[1, 1]]), 1.0)


def test_causality_of_shipped_and_anticausal_laws(rng):
    A = _skew(rng, 2) + np.eye(2)
    assert check_causality(ConstantLaw(np.eye(2)), A, 1.0, a=0.5, trials=2) < 1e-6
    mesh = SpatialMesh(0.0, 1.0, 2)
    law = delay_material_law(DelayLaw.on_mesh(mesh, [0.25], [0.3]))
    assert check_causality(law, build_block_operator(mesh), 2.0, trials=2) < 1e-6
    assert check_causality(ShiftLaw(-1.0), [[5.0]], 0.5, trials=2) > 1e-2


def test_rho_independence(rng):
    A = _skew(rng, 2) + 0.5 * np.eye(2)
    M = ConstantLaw(np.eye(2))
    assert check_rho_independence(M, A, 2.0, 1.0, trials=2) < 1e-6
    assert check_rho_independence(M, A, 1.0, 1.0, trials=1) == 0.0
