import math

import numpy as np
import pytest

from evosg.cutoff_ops import (
    DiracAtom,
    MinusOneElement,
    cutoff_P,
    cutoff_Q,
    embed,
    is_supported_left_of,
    jump_atom,
    load_minus_one,
    save_minus_one,
    total_antiderivative,
)
from evosg.errors import InvalidWeightError, NotInDomainError
from evosg.fourier_laplace import FunctionLaw, apply_material_law
from evosg.weighted_time import TimeGrid, WeightedSignal, heaviside, indicator

from conftest import random_signal

# the limit estimator needs w'' dt^2 well below 1e-4 |w|, hence the fine step
GRID = TimeGrid(-4.0, 1 / 1024, 1 << 14)


def _same(F, G, atol=1e-12):
    a, b = total_antiderivative(F).values, total_antiderivative(G).values
    np.testing.assert_allclose(a, b, atol=atol)


def test_embed_zero_and_round_trip(rng):
    z = embed(WeightedSignal.zeros(GRID, 1.0, 2))
    assert z.norm() == 0.0 and z.atoms == []
    # the window must reach far enough that exp(-rho t_end) hides the wrap of w
    long = TimeGrid(-4.0, 1 / 256, 1 << 13)
    f = random_signal(rng, long, 1.0, 2, lo=-2.0, hi=2.0)
    # the trapezoid-calculus derivative inverts the cumulative trapezoid rule
    d = FunctionLaw(lambda s: s[:, None, None] * np.eye(2), dim=2)
    back = apply_material_law(d, embed(f).regular_antiderivative, calculus="trapezoid")
    assert (back - f).norm() < 1e-8 * f.norm()


def test_embed_norm_bound(rng):
    for rho in (0.5, 1.0, 3.0):
        f = random_signal(rng, GRID, rho, 1)
        assert embed(f).norm() <= f.norm() / rho * (1 + 1e-12)


def test_rho_must_be_positive():
    with pytest.raises(InvalidWeightError):
        embed(WeightedSignal.zeros(GRID, 0.0, 1))


def test_single_atom_antiderivatives():
    y = np.array([1.0, -2.0])
    # [PAPER] atom at 0 with rho = 1 integrates to chi_{>=0} y
    w = total_antiderivative(MinusOneElement.atom(GRID, 1.0, 0.0, y))
    np.testing.assert_allclose(w.values, np.outer(heaviside(GRID, 0.0), y))
    # [DERIVED] atom at 0.5: closed form exp(2 rho 0.5) chi_{>=0.5} y = e chi y
    w = total_antiderivative(MinusOneElement.atom(GRID, 1.0, 0.5, y))
    np.testing.assert_allclose(w.values, np.outer(math.e * heaviside(GRID, 0.5), y), rtol=1e-15)


def test_atoms_empty_keeps_regular_part(rng):
    F = embed(random_signal(rng, GRID, 1.0, 1))
    np.testing.assert_array_equal(total_antiderivative(F).values, F.regular_antiderivative.values)


@pytest.mark.parametrize("s, kept", [(1.5, True), (1.0, False), (0.25, False)])
def test_P_on_atoms(s, kept):
    F = MinusOneElement.atom(GRID, 1.0, s, [2.0])
    P = cutoff_P(F, 1.0)
    assert P.norm() == pytest.approx(F.norm() if kept else 0.0, abs=1e-14)


@pytest.mark.parametrize("s, kept", [(0.5, True), (1.0, False), (2.0, False)])
def test_Q_on_atoms(s, kept):
    F = MinusOneElement.atom(GRID, 1.0, s, [2.0])
    Q = cutoff_Q(F, 1.0)
    assert (len(Q.atoms) == 1) is kept


def test_P_kills_left_supported(rng):
    f = random_signal(rng, GRID, 1.0, 2, lo=-3.0, hi=0.5)
    assert cutoff_P(embed(f), 0.5).norm() < 1e-12 * embed(f).norm()
    assert is_supported_left_of(embed(f), 0.5)
    assert not is_supported_left_of(embed(f), -1.0)


def test_P_of_indicator():
    # [DERIVED] multiplication oracle: P_1 chi_[0,2) x = chi_[1,2) x
    x = np.array([1.0, 3.0])
    f = WeightedSignal(GRID, 1.0, np.outer(indicator(GRID, 0.0, 2.0, "mean"), x))
    h = WeightedSignal(GRID, 1.0, np.outer(indicator(GRID, 1.0, 2.0, "mean"), x))
    a = total_antiderivative(cutoff_P(embed(f), 1.0)).values
    b = total_antiderivative(embed(h)).values
    # the half-valued jump nodes carry an O(dt) quadrature offset
    jumps = np.isclose(GRID.times, 1.0) | np.isclose(GRID.times, 2.0)
    np.testing.assert_allclose(a[~jumps], b[~jumps], atol=1e-8)
    np.testing.assert_allclose(a[jumps], b[jumps], atol=GRID.dt)


def test_decomposition_with_jump(rng):
    f = random_signal(rng, GRID, 1.0, 2)
    F = embed(f) + MinusOneElement.atom(GRID, 1.0, 0.5, [1.0, 1.0j])
    for t in (-1.0, 0.5, 1.25):
        rest = F - cutoff_P(F, t) - cutoff_Q(F, t)
        J = MinusOneElement(WeightedSignal.zeros(GRID, 1.0, 2), [jump_atom(F, t)])
        _same(rest, J, atol=1e-10)


def test_continuous_point_has_no_jump(rng):
    F = embed(random_signal(rng, GRID, 1.0, 1))
    assert np.linalg.norm(jump_atom(F, 0.375).weight) < 1e-8
    _same(F, cutoff_P(F, 0.375) + cutoff_Q(F, 0.375), atol=1e-8)


def test_idempotence_and_zero(rng):
    F = embed(random_signal(rng, GRID, 1.0, 2))
    P = cutoff_P(F, 0.0)
    _same(cutoff_P(P, 0.0), P)
    Q = cutoff_Q(F, 0.0)
    _same(cutoff_Q(Q, 0.0), Q)
    Z = MinusOneElement.zeros(GRID, 1.0, 1)
    assert cutoff_Q(Z, 0.0).norm() == 0.0


def test_P_requires_right_limit():
    vals = np.where(np.arange(GRID.n_points) % 2 == 0, 1.0, -1.0)
    F = MinusOneElement(WeightedSignal(GRID, 1.0, vals))
    with pytest.raises(NotInDomainError):
        cutoff_P(F, 0.0)


def test_duplicate_atoms_rejected():
    with pytest.raises(ValueError):
        MinusOneElement(WeightedSignal.zeros(GRID, 1.0, 1), [DiracAtom(0, [1]), DiracAtom(0, [2])])


def test_save_and_load(tmp_path, rng):
    F = embed(random_signal(rng, GRID, 1.0, 2)) + MinusOneElement.atom(GRID, 1.0, 0.25, [1, 2j])
    save_minus_one(F, tmp_path / "F.json", tmp_path / "F.csv")
    G = load_minus_one(tmp_path / "F.json")
    _same(F, G, atol=0)
    assert [a.location for a in G.atoms] == [0.25]
