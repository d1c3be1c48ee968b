import numpy as np
import pytest
import scipy.linalg as sla

from evosg.dae import (
    MatrixPencil,
    consistency_angle,
    dae_semigroup,
    hy_condition,
    iv_space,
    random_index1_pencil,
    weierstrass_solve,
)
from evosg.errors import InadmissibleHistoryError, OracleUnavailableError
from evosg.history_ivp import tent_history
from evosg.weighted_time import TimeGrid

DIAG = MatrixPencil(np.diag([1.0, 0.0]), np.eye(2))


# iv_space [TRIVIAL]


def test_iv_space_identity_is_everything():
    assert iv_space(MatrixPencil(np.eye(3), np.diag([1.0, 2.0, 3.0]))).dim == 3


def test_iv_space_algebraic_component_removed():
    U = iv_space(DIAG)
    assert U.dim == 1
    assert U.contains([1.0, 0.0])
    assert not U.contains([0.0, 1.0])
    assert U.residual < 1e-12


def test_iv_space_zero_mass_is_trivial():
    assert iv_space(MatrixPencil(np.zeros((2, 2)), np.eye(2))).dim == 0


def test_consistency_subspace_matches_qz(rng):
    for _ in range(5):
        p, _ = random_index1_pencil(4, 2, rng)
        assert consistency_angle(p) < 1e-8


# regularity


def test_singular_pencil_detected():
    p = MatrixPencil(np.diag([1.0, 0.0]), np.diag([1.0, 0.0]))
    assert not p.regular
    with pytest.raises(OracleUnavailableError):
        weierstrass_solve(p, [1.0, 0.0], [0.0, 1.0])


def test_regular_pencil_flag():
    assert DIAG.regular
    assert DIAG.spectral_bound() == pytest.approx(-1.0)


# Hille-Yosida fit


@pytest.mark.parametrize("a", [0.5, 2.0])
def test_hy_scalar_dissipative(a):
    rep = hy_condition(MatrixPencil([[1.0]], [[a]]))
    assert rep.passed
    assert rep.M == pytest.approx(1.0, rel=0.05)
    assert rep.omega == pytest.approx(-a, abs=0.05 * max(1.0, a))


def test_hy_index_one_diag():
    rep = hy_condition(DIAG)
    assert rep.passed
    assert rep.M == pytest.approx(1.0, rel=0.05)
    assert rep.omega == pytest.approx(-1.0, abs=0.05)


def test_hy_skew_bounded_by_mass_condition(rng):
    m = 6
    X = rng.standard_normal((m, m))
    E = X @ X.T + m * np.eye(m)
    S = rng.standard_normal((m, m))
    rep = hy_condition(MatrixPencil(E, S - S.T))
    root = sla.sqrtm(E).real
    assert rep.passed
    assert rep.omega == pytest.approx(0.0, abs=0.05)
    assert rep.M <= np.linalg.cond(root) * 1.05


def test_hy_report_as_dict():
    d = hy_condition(DIAG, n_max=8).as_dict()
    assert set(d) >= {"pass", "M", "omega", "witness"}
    assert d["n_max"] == 8


# Weierstrass oracle


def test_weierstrass_ode_matches_expm(rng):
    A = rng.standard_normal((3, 3))
    x0 = rng.standard_normal(3)
    t = np.linspace(0.0, 1.5, 7)
    sol = weierstrass_solve(MatrixPencil(np.eye(3), A), x0, t)
    ref = np.array([sla.expm(-s * A) @ x0 for s in t])
    assert sol.consistent
    assert sol.index == 0
    np.testing.assert_allclose(sol.values, ref, atol=1e-10)


def test_weierstrass_index_one():
    t = np.linspace(0, 2, 5)
    sol = weierstrass_solve(DIAG, [1.0, 0.0], t)
    assert sol.consistent
    assert sol.index == 1
    np.testing.assert_allclose(sol.values[:, 0], np.exp(-t), atol=1e-12)
    np.testing.assert_allclose(sol.values[:, 1], 0.0, atol=1e-12)


def test_weierstrass_flags_inconsistent():
    assert not weierstrass_solve(DIAG, [0.0, 1.0], [0.0]).consistent


# semigroup via the history machinery


def test_semigroup_scalar():
    a = 1.0
    p = MatrixPencil([[1.0]], [[a]])
    for t in (0.5, 1.0):
        assert dae_semigroup(p, [1.0], t)[0] == pytest.approx(np.exp(-a * t), abs=1e-6)


def test_semigroup_at_zero_returns_initial():
    np.testing.assert_allclose(dae_semigroup(DIAG, [2.0, 0.0], 0.0), [2.0, 0.0], atol=1e-6)


def test_semigroup_index_one():
    v = dae_semigroup(DIAG, [1.0, 0.0], 1.0)
    np.testing.assert_allclose(v, [np.exp(-1.0), 0.0], atol=1e-6)


def test_semigroup_random_pencil_matches_oracle():
    rng = np.random.default_rng(3)
    p, basis = random_index1_pencil(4, 2, rng)
    x = basis @ rng.standard_normal(2)
    got = dae_semigroup(p, x, 1.0)
    ref = weierstrass_solve(p, x, [1.0]).values[0]
    assert np.linalg.norm(got - ref) <= 1e-6 * max(1.0, np.linalg.norm(ref))


def test_semigroup_rejects_inconsistent():
    with pytest.raises(InadmissibleHistoryError):
        dae_semigroup(DIAG, [0.0, 1.0], 1.0)


def test_semigroup_rejects_negative_time():
    with pytest.raises(ValueError):
        dae_semigroup(DIAG, [1.0, 0.0], -1.0)


def test_semigroup_obeys_fitted_growth():
    p = MatrixPencil(np.diag([1.0, 2.0, 0.0]), np.array([[1.0, 1.0, 0.0], [-1.0, 1.0, 0.0], [0.0, 0.0, 1.0]]))
    rep = hy_condition(p)
    assert rep.passed
    x = np.array([1.0, -0.5, 0.0])
    for t in (0.5, 1.5):
        v = dae_semigroup(p, x, t)
        bound = (rep.M + 0.1) * np.exp((rep.omega + 0.1) * t) * np.linalg.norm(x)
        assert np.linalg.norm(v) <= bound


# tent histories


def test_tent_norm_shrinks_with_width():
    grid = TimeGrid.aligned(-2.0, 8.0, 1 << 14, unit=1 / 16)
    norms = [tent_history(grid, 1.0, [1.0], 1.0 / k).norm() for k in (1, 2, 4, 8, 16)]
    for a, b in zip(norms, norms[1:]):
        assert a / b >= np.sqrt(2) * (1 - 1e-3)
